//! Porter suffix stripping.
//!
//! Faithful port of Martin Porter's reference implementation of his 1980
//! algorithm, including its two documented departures from the original
//! paper (`bli -> ble` instead of `abli -> able`, and the extra
//! `logi -> log` rule) and the later guard fixes (words of length one or two
//! are left alone; the `ion` rule cannot underrun the buffer).
//!
//! Input is expected to be a lowercase ASCII word. Anything containing a
//! non-ASCII-alphabetic character (digits, hyphens, accented letters) passes
//! through unchanged; uppercase ASCII letters are folded before stemming.

/// Stems a single word.
pub fn porter_stem(word: &str) -> String {
    if word.chars().any(|c| !c.is_ascii_alphabetic()) {
        return word.to_string();
    }
    let b: Vec<char> = word.chars().map(|c| c.to_ascii_lowercase()).collect();
    if b.len() <= 2 {
        return b.into_iter().collect();
    }
    let k = b.len() - 1;
    let mut s = Stemmer { b, k, j: 0 };
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    s.b[..=s.k].iter().collect()
}

struct Stemmer {
    /// Word characters; positions beyond `k` are dead.
    b: Vec<char>,
    /// Index of the last live character.
    k: usize,
    /// End of the candidate stem set by `ends`; -1 means the stem is empty.
    j: isize,
}

impl Stemmer {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            'a' | 'e' | 'i' | 'o' | 'u' => false,
            'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of consonant-vowel-consonant sequences in `b[0..=j]`; the
    /// "measure" m of the candidate stem.
    fn measure(&self) -> usize {
        if self.j < 0 {
            return 0;
        }
        let j = self.j as usize;
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i as usize))
    }

    fn double_c(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.cons(i)
    }

    /// consonant-vowel-consonant ending at `i`, where the final consonant is
    /// not w, x or y; the shape that wants a trailing e restored (hop -> hope
    /// territory).
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], 'w' | 'x' | 'y')
    }

    fn ends(&mut self, s: &str) -> bool {
        let n = s.len();
        if n > self.k + 1 {
            return false;
        }
        let start = self.k + 1 - n;
        if self.b[start..=self.k].iter().copied().eq(s.chars()) {
            self.j = start as isize - 1;
            true
        } else {
            false
        }
    }

    /// Replaces the suffix after `j` with `s`.
    fn set_to(&mut self, s: &str) {
        let start = (self.j + 1) as usize;
        self.b.truncate(start);
        self.b.extend(s.chars());
        self.k = self.b.len() - 1;
    }

    /// `set_to`, but only when the stem before the suffix has m > 0.
    fn replace(&mut self, s: &str) {
        if self.measure() > 0 {
            self.set_to(s);
        }
    }

    /// Plural endings and -ed/-ing.
    fn step1ab(&mut self) {
        if self.b[self.k] == 's' {
            if self.ends("sses") {
                self.k -= 2;
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b[self.k - 1] != 's' {
                self.k -= 1;
            }
        }
        if self.ends("eed") {
            if self.measure() > 0 {
                self.k -= 1;
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            self.k = self.j as usize;
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_c(self.k) {
                self.k -= 1;
                if matches!(self.b[self.k], 'l' | 's' | 'z') {
                    self.k += 1;
                }
            } else if self.measure() == 1 && self.cvc(self.k) {
                self.set_to("e");
            }
        }
    }

    /// Terminal y -> i when the stem holds a vowel.
    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            self.b[self.k] = 'i';
        }
    }

    /// Double suffixes mapped to single ones (-ization -> -ize, ...).
    fn step2(&mut self) {
        if self.k == 0 {
            return;
        }
        match self.b[self.k - 1] {
            'a' => {
                if self.ends("ational") {
                    self.replace("ate");
                } else if self.ends("tional") {
                    self.replace("tion");
                }
            }
            'c' => {
                if self.ends("enci") {
                    self.replace("ence");
                } else if self.ends("anci") {
                    self.replace("ance");
                }
            }
            'e' => {
                if self.ends("izer") {
                    self.replace("ize");
                }
            }
            'l' => {
                if self.ends("abli") {
                    self.replace("able");
                } else if self.ends("alli") {
                    self.replace("al");
                } else if self.ends("entli") {
                    self.replace("ent");
                } else if self.ends("eli") {
                    self.replace("e");
                } else if self.ends("ousli") {
                    self.replace("ous");
                }
            }
            'o' => {
                if self.ends("ization") {
                    self.replace("ize");
                } else if self.ends("ation") {
                    self.replace("ate");
                } else if self.ends("ator") {
                    self.replace("ate");
                }
            }
            's' => {
                if self.ends("alism") {
                    self.replace("al");
                } else if self.ends("iveness") {
                    self.replace("ive");
                } else if self.ends("fulness") {
                    self.replace("ful");
                } else if self.ends("ousness") {
                    self.replace("ous");
                }
            }
            't' => {
                if self.ends("aliti") {
                    self.replace("al");
                } else if self.ends("iviti") {
                    self.replace("ive");
                } else if self.ends("biliti") {
                    self.replace("ble");
                }
            }
            _ => {}
        }
    }

    /// -icate, -ative and friends.
    fn step3(&mut self) {
        match self.b[self.k] {
            'e' => {
                if self.ends("icate") {
                    self.replace("ic");
                } else if self.ends("ative") {
                    self.replace("");
                } else if self.ends("alize") {
                    self.replace("al");
                }
            }
            'i' => {
                if self.ends("iciti") {
                    self.replace("ic");
                }
            }
            'l' => {
                if self.ends("ical") {
                    self.replace("ic");
                } else if self.ends("ful") {
                    self.replace("");
                }
            }
            's' => {
                if self.ends("ness") {
                    self.replace("");
                }
            }
            _ => {}
        }
    }

    /// Drops remaining suffixes when the stem is long enough (m > 1).
    fn step4(&mut self) {
        if self.k == 0 {
            return;
        }
        let matched = match self.b[self.k - 1] {
            'a' => self.ends("al"),
            'c' => self.ends("ance") || self.ends("ence"),
            'e' => self.ends("er"),
            'i' => self.ends("ic"),
            'l' => self.ends("able") || self.ends("ible"),
            'n' => self.ends("ant") || self.ends("ement") || self.ends("ment") || self.ends("ent"),
            'o' => {
                (self.ends("ion") && self.j >= 0 && matches!(self.b[self.j as usize], 's' | 't'))
                    || self.ends("ou")
            }
            's' => self.ends("ism"),
            't' => self.ends("ate") || self.ends("iti"),
            'u' => self.ends("ous"),
            'v' => self.ends("ive"),
            'z' => self.ends("ize"),
            _ => false,
        };
        if matched && self.measure() > 1 {
            self.k = self.j as usize;
        }
    }

    /// Final -e and -ll cleanup.
    fn step5(&mut self) {
        self.j = self.k as isize;
        if self.b[self.k] == 'e' {
            let a = self.measure();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.b[self.k] == 'l' && self.double_c(self.k) && self.measure() > 1 {
            self.k -= 1;
        }
    }
}
