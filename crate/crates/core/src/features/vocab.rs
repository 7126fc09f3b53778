//! Bounded word vocabularies.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// The `max_size` most frequent words of a training corpus, ties broken
/// lexicographically. Positions are 0-based over `entries`; embedding
/// matrices reserve two extra leading rows for PAD and UNK, see
/// [`super::encoding`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<String>,
    index: HashMap<String, usize>,
    max_size: usize,
}

impl Vocabulary {
    /// Ranks words by frequency and keeps the top `max_size`.
    pub fn fit<'a>(token_lists: impl IntoIterator<Item = &'a [String]>, max_size: usize) -> Result<Self> {
        if max_size == 0 {
            return Err(Error::InvalidParameter("vocabulary size must be positive".into()));
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for tokens in token_lists {
            for tok in tokens {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let entries: Vec<String> = ranked.into_iter().take(max_size).map(|(w, _)| w.to_string()).collect();
        Ok(Vocabulary::from_entries(entries, max_size))
    }

    /// Restores a vocabulary from its entry list (container deserialization).
    pub fn from_entries(entries: Vec<String>, max_size: usize) -> Self {
        let index = entries.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocabulary { entries, index, max_size }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Position of `word` in `entries`, if present.
    pub fn position(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn word(&self, position: usize) -> &str {
        &self.entries[position]
    }
}
