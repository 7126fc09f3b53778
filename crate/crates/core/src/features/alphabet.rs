//! Character alphabets for the character channels.
//!
//! An alphabet maps characters to dense indices. Index 0 is always PAD and
//! index 1 is always UNK; the visible symbols follow. Every numeric
//! character collapses onto a single DIGIT marker, so "2016" and "1999" look
//! identical to a character model. The default alphabet has 98 visible
//! symbols: 26 lowercase and 26 uppercase letters, the DIGIT marker, 42
//! punctuation and symbol characters, and space, newline and tab.
//!
//! Alphabets load from UTF-8 text files with one symbol per line. The
//! directives `#DIGIT`, `#SPACE`, `#NEWLINE` and `#TAB` name the digit
//! marker and the whitespace symbols; any other line must hold exactly one
//! character. Blank lines are skipped.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Index of the padding symbol in every alphabet.
pub const ALPHABET_PAD: usize = 0;
/// Index of the unknown-character symbol in every alphabet.
pub const ALPHABET_UNK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Pad,
    Unk,
    Digit,
    Char(char),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Pad => write!(f, "#PAD"),
            Symbol::Unk => write!(f, "#UNK"),
            Symbol::Digit => write!(f, "#DIGIT"),
            Symbol::Char(' ') => write!(f, "#SPACE"),
            Symbol::Char('\n') => write!(f, "#NEWLINE"),
            Symbol::Char('\t') => write!(f, "#TAB"),
            Symbol::Char(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    /// All symbols, bookkeeping included: `symbols[0]` is PAD, `symbols[1]`
    /// is UNK.
    symbols: Vec<Symbol>,
    map: HashMap<char, usize>,
    digit_index: usize,
}

impl Alphabet {
    /// Builds an alphabet from visible symbols (PAD and UNK are added
    /// automatically). Errors on duplicates or on a missing DIGIT marker.
    pub fn from_symbols(visible: Vec<Symbol>) -> Result<Self> {
        let mut symbols = vec![Symbol::Pad, Symbol::Unk];
        symbols.extend(visible);
        let mut map = HashMap::new();
        let mut digit_index = None;
        for (i, sym) in symbols.iter().enumerate() {
            match sym {
                Symbol::Pad | Symbol::Unk if i >= 2 => {
                    return Err(Error::InvalidParameter("PAD/UNK are implicit alphabet symbols".into()))
                }
                Symbol::Digit => {
                    if digit_index.replace(i).is_some() {
                        return Err(Error::InvalidParameter("duplicate #DIGIT marker".into()));
                    }
                }
                Symbol::Char(c) => {
                    if map.insert(*c, i).is_some() {
                        return Err(Error::InvalidParameter(format!("duplicate alphabet symbol {c:?}")));
                    }
                }
                _ => {}
            }
        }
        let digit_index = digit_index
            .ok_or_else(|| Error::InvalidParameter("alphabet has no #DIGIT marker".into()))?;
        Ok(Alphabet { symbols, map, digit_index })
    }

    /// The built-in 98-symbol alphabet (100 indices with PAD and UNK).
    pub fn default_98() -> Self {
        let mut visible = Vec::new();
        visible.extend(('a'..='z').map(Symbol::Char));
        visible.extend(('A'..='Z').map(Symbol::Char));
        visible.push(Symbol::Digit);
        visible.extend(r##"!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~"##.chars().map(Symbol::Char));
        visible.extend("–—‘’“”…•°€".chars().map(Symbol::Char));
        visible.extend([' ', '\n', '\t'].map(Symbol::Char));
        Alphabet::from_symbols(visible).expect("built-in alphabet is well-formed")
    }

    /// Parses the one-symbol-per-line format described in the module docs.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut visible = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let sym = match line {
                "#DIGIT" => Symbol::Digit,
                "#SPACE" => Symbol::Char(' '),
                "#NEWLINE" => Symbol::Char('\n'),
                "#TAB" => Symbol::Char('\t'),
                other => {
                    let mut chars = other.chars();
                    let c = chars.next().expect("line is non-empty");
                    if chars.next().is_some() {
                        return Err(Error::malformed(
                            path,
                            idx + 1,
                            format!("expected one symbol or a directive, got {other:?}"),
                        ));
                    }
                    Symbol::Char(c)
                }
            };
            visible.push(sym);
        }
        Alphabet::from_symbols(visible)
            .map_err(|e| Error::malformed(path, 0, e.to_string()))
    }

    /// Serializes back to the file format; `from_lines` inverts this.
    pub fn to_lines(&self) -> Vec<String> {
        self.symbols[2..].iter().map(|s| s.to_string()).collect()
    }

    /// Rebuilds an alphabet from `to_lines` output (used by the model
    /// container, which embeds the alphabet in its metadata).
    pub fn from_lines(lines: &[String]) -> Result<Self> {
        let mut visible = Vec::new();
        for line in lines {
            let sym = match line.as_str() {
                "#DIGIT" => Symbol::Digit,
                "#SPACE" => Symbol::Char(' '),
                "#NEWLINE" => Symbol::Char('\n'),
                "#TAB" => Symbol::Char('\t'),
                other => {
                    let mut chars = other.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Symbol::Char(c),
                        _ => return Err(Error::Container(format!("bad alphabet symbol {other:?}"))),
                    }
                }
            };
            visible.push(sym);
        }
        Alphabet::from_symbols(visible)
    }

    /// Total number of indices, PAD and UNK included.
    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    /// Number of visible symbols (excluding PAD and UNK).
    pub fn visible_size(&self) -> usize {
        self.symbols.len() - 2
    }

    /// Maps a character to its index: listed characters map to themselves,
    /// any numeric character maps to the DIGIT marker, everything else to
    /// UNK.
    pub fn encode(&self, c: char) -> usize {
        if let Some(&i) = self.map.get(&c) {
            return i;
        }
        if c.is_numeric() {
            return self.digit_index;
        }
        ALPHABET_UNK
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::default_98()
    }
}

impl serde::Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_lines().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let lines = Vec::<String>::deserialize(deserializer)?;
        Alphabet::from_lines(&lines).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_alphabet_has_98_visible_symbols() {
        let a = Alphabet::default_98();
        assert_eq!(a.visible_size(), 98);
        assert_eq!(a.size(), 100);
    }

    #[test]
    fn pad_and_unk_sit_at_the_bookkeeping_indices() {
        let a = Alphabet::default_98();
        assert_eq!(a.symbols()[ALPHABET_PAD], Symbol::Pad);
        assert_eq!(a.symbols()[ALPHABET_UNK], Symbol::Unk);
    }

    #[test]
    fn case_is_distinguished() {
        let a = Alphabet::default_98();
        assert_ne!(a.encode('a'), a.encode('A'));
    }

    #[test]
    fn digits_collapse_onto_one_marker() {
        let a = Alphabet::default_98();
        let d = a.encode('0');
        for c in "123456789".chars() {
            assert_eq!(a.encode(c), d);
        }
        assert_ne!(d, ALPHABET_UNK);
    }

    #[test]
    fn unknown_characters_map_to_unk() {
        let a = Alphabet::default_98();
        assert_eq!(a.encode('λ'), ALPHABET_UNK);
        assert_eq!(a.encode('\r'), ALPHABET_UNK);
    }

    #[test]
    fn whitespace_symbols_are_present() {
        let a = Alphabet::default_98();
        assert_ne!(a.encode(' '), ALPHABET_UNK);
        assert_ne!(a.encode('\n'), ALPHABET_UNK);
        assert_ne!(a.encode('\t'), ALPHABET_UNK);
    }

    #[test]
    fn file_round_trip() {
        let a = Alphabet::default_98();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alphabet.txt");
        std::fs::write(&path, a.to_lines().join("\n")).unwrap();
        let b = Alphabet::from_file(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_symbols_are_rejected() {
        let err = Alphabet::from_symbols(vec![Symbol::Char('a'), Symbol::Char('a'), Symbol::Digit]);
        assert!(err.is_err());
    }

    #[test]
    fn lines_round_trip() {
        let a = Alphabet::default_98();
        let b = Alphabet::from_lines(&a.to_lines()).unwrap();
        assert_eq!(a, b);
    }
}
