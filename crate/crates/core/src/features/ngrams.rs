//! Character n-grams and truncated frequency profiles.

use std::collections::HashMap;

/// Multiset of character n-grams of `text`. Windows slide over Unicode
/// scalar values, one position at a time; a text shorter than `n` yields an
/// empty map. With `space_free` set, every n-gram containing a whitespace
/// character is dropped — the windows are *not* re-joined across gaps.
pub fn char_ngrams(text: &str, n: usize, space_free: bool) -> HashMap<String, u64> {
    assert!(n > 0, "n-gram size must be positive");
    let chars: Vec<char> = text.chars().collect();
    let mut counts = HashMap::new();
    if chars.len() < n {
        return counts;
    }
    for window in chars.windows(n) {
        if space_free && window.iter().any(|c| c.is_whitespace()) {
            continue;
        }
        *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
    }
    counts
}

/// The `profile_size` most frequent n-grams of a set of texts, counted over
/// their concatenation (texts joined by a single newline so windows may span
/// the seams), plus the full counts they were drawn from.
#[derive(Debug, Clone)]
pub struct NgramProfile {
    pub ngram_size: usize,
    /// Full n-gram counts of the concatenated text.
    pub counts: HashMap<String, u64>,
    /// Most frequent n-grams, ties broken lexicographically, at most
    /// `profile_size` entries.
    pub top: Vec<String>,
}

/// Builds the truncated profile of `texts`.
pub fn build_profile(texts: &[&str], ngram_size: usize, profile_size: usize) -> NgramProfile {
    let joined = texts.join("\n");
    let counts = char_ngrams(&joined, ngram_size, false);
    let top = top_ngrams(&counts, profile_size);
    NgramProfile { ngram_size, counts, top }
}

/// The `limit` most frequent keys of `counts`, descending by count with
/// lexicographic tie-breaks.
pub fn top_ngrams(counts: &HashMap<String, u64>, limit: usize) -> Vec<String> {
    let mut entries: Vec<(&String, u64)> = counts.iter().map(|(g, &c)| (g, c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.into_iter().take(limit).map(|(g, _)| g.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_bigrams() {
        let counts = char_ngrams("abcd", 2, false);
        assert_eq!(counts.len(), 3);
        assert_eq!(counts["ab"], 1);
        assert_eq!(counts["bc"], 1);
        assert_eq!(counts["cd"], 1);
    }

    #[test]
    fn space_free_drops_gap_windows() {
        let counts = char_ngrams("a b", 2, true);
        assert!(counts.is_empty());
        let counts = char_ngrams("ab cd", 2, true);
        assert_eq!(counts.len(), 2);
        assert!(counts.contains_key("ab") && counts.contains_key("cd"));
    }

    #[test]
    fn repeated_grams_accumulate() {
        let counts = char_ngrams("aaa", 2, false);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["aa"], 2);
    }

    #[test]
    fn short_text_has_no_ngrams() {
        assert!(char_ngrams("ab", 3, false).is_empty());
        assert!(char_ngrams("", 1, false).is_empty());
    }

    #[test]
    fn profile_counts_span_the_seam() {
        let profile = build_profile(&["ab", "ab"], 2, 10);
        // Concatenation is "ab\nab": ab twice plus the two seam bigrams.
        assert_eq!(profile.counts["ab"], 2);
        assert_eq!(profile.counts["b\n"], 1);
        assert_eq!(profile.counts["\na"], 1);
        assert_eq!(profile.top.len(), 3);
        assert_eq!(profile.top[0], "ab");
    }

    #[test]
    fn profile_ties_break_lexicographically() {
        let profile = build_profile(&["aaabaaab"], 2, 1);
        // aa: 4, ab: 2, ba: 1 — single winner.
        assert_eq!(profile.top, vec!["aa"]);
        let mut counts = HashMap::new();
        counts.insert("zz".to_string(), 2);
        counts.insert("aa".to_string(), 2);
        assert_eq!(top_ngrams(&counts, 1), vec!["aa"]);
    }

    #[test]
    fn profile_shorter_than_limit_keeps_everything() {
        let profile = build_profile(&["abc"], 2, 100);
        assert_eq!(profile.top.len(), 2);
    }
}
