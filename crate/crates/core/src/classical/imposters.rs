//! Attribution by repeated cosine votes over random feature subsets.
//!
//! Training fixes a vocabulary of the most frequent space-free character
//! n-grams (count descending, n-gram ascending on ties) and one raw count
//! vector per author over that vocabulary. Prediction runs a fixed number
//! of rounds; each round draws a random subset of the vocabulary and votes
//! for the author whose profile has the highest cosine similarity to the
//! text on those features alone. The author with the most votes wins and
//! the vote share becomes the score.
//!
//! Randomness is fully specified so results can be reproduced exactly: a
//! fresh xorshift64* generator is seeded with the model seed at the start
//! of every `predict` call, and each round consumes exactly `k` draws
//! (`k = ceil(feature_fraction * vocabulary size)`) through a partial
//! Fisher-Yates pass: starting from the identity index array, for
//! `i in 0..k` swap position `i` with position `i + below(len - i)`, then
//! keep the first `k` positions.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{char_ngrams, top_ngrams};
use crate::rng::XorShift64;
use crate::Prediction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpostersConfig {
    pub ngram_size: usize,
    pub vocab_size: usize,
    pub iterations: usize,
    pub feature_fraction: f64,
    pub seed: u64,
}

impl Default for ImpostersConfig {
    fn default() -> Self {
        ImpostersConfig {
            ngram_size: 4,
            vocab_size: 30_000,
            iterations: 500,
            feature_fraction: 0.3,
            seed: 0,
        }
    }
}

impl ImpostersConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_size == 0 {
            return Err(Error::InvalidParameter("n-gram size must be positive".into()));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidParameter("vocabulary size must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iteration count must be positive".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "feature_fraction must be in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpostersModel {
    config: ImpostersConfig,
    vocab: Vec<String>,
    profiles: BTreeMap<String, Vec<f64>>,
}

impl ImpostersModel {
    pub fn train(corpus: &Corpus, config: &ImpostersConfig) -> Result<ImpostersModel> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus("cannot train on an empty corpus".into()));
        }
        let mut totals: HashMap<String, u64> = HashMap::new();
        for doc in corpus.documents() {
            for (gram, count) in char_ngrams(&doc.text, config.ngram_size, true) {
                *totals.entry(gram).or_insert(0) += count;
            }
        }
        if totals.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let vocab = top_ngrams(&totals, config.vocab_size);
        let index: HashMap<&str, usize> =
            vocab.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
        let mut profiles = BTreeMap::new();
        for author in corpus.authors() {
            let mut vector = vec![0.0; vocab.len()];
            for &doc in corpus.docs_of(author) {
                let counts =
                    char_ngrams(&corpus.documents()[doc].text, config.ngram_size, true);
                for (gram, count) in counts {
                    if let Some(&i) = index.get(gram.as_str()) {
                        vector[i] += count as f64;
                    }
                }
            }
            profiles.insert(author.to_string(), vector);
        }
        Ok(ImpostersModel { config: *config, vocab, profiles })
    }

    /// Attributes `text` by vote share over the configured number of rounds.
    /// Rounds where the text has no mass on the drawn subset abstain; if
    /// every round abstains the text shares nothing with the vocabulary and
    /// prediction fails with [`Error::FeatureStarvation`].
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let counts = char_ngrams(text, self.config.ngram_size, true);
        let mut vector = vec![0.0; self.vocab.len()];
        for (i, gram) in self.vocab.iter().enumerate() {
            if let Some(&c) = counts.get(gram) {
                vector[i] = c as f64;
            }
        }
        let k = subset_size(self.config.feature_fraction, self.vocab.len());
        let mut rng = XorShift64::new(self.config.seed);
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        let mut counted = 0usize;
        let mut indices: Vec<usize> = (0..self.vocab.len()).collect();
        for _ in 0..self.config.iterations {
            partial_shuffle(&mut indices, k, &mut rng);
            let subset = &indices[..k];
            let text_norm: f64 = subset.iter().map(|&i| vector[i] * vector[i]).sum::<f64>().sqrt();
            if text_norm == 0.0 {
                continue;
            }
            let mut best: Option<(&str, f64)> = None;
            for (author, profile) in &self.profiles {
                let mut dot = 0.0;
                let mut norm = 0.0;
                for &i in subset {
                    dot += profile[i] * vector[i];
                    norm += profile[i] * profile[i];
                }
                let cosine = if norm == 0.0 { 0.0 } else { dot / (norm.sqrt() * text_norm) };
                if best.map_or(true, |(_, s)| cosine > s) {
                    best = Some((author, cosine));
                }
            }
            let (winner, _) = best.expect("trained model has authors");
            *votes.entry(winner).or_insert(0) += 1;
            counted += 1;
        }
        if counted == 0 {
            return Err(Error::FeatureStarvation);
        }
        let (author, n) = votes
            .iter()
            .fold(None::<(&str, usize)>, |best, (a, &n)| {
                if best.map_or(true, |(_, m)| n > m) { Some((a, n)) } else { best }
            })
            .expect("at least one counted round");
        Ok(Prediction::new(author, n as f64 / counted as f64))
    }

    pub fn config(&self) -> &ImpostersConfig {
        &self.config
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(|s| s.as_str())
    }

    pub fn profile(&self, author: &str) -> Option<&[f64]> {
        self.profiles.get(author).map(|v| v.as_slice())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let authors: Vec<&String> = self.profiles.keys().collect();
        let metadata = serde_json::json!({
            "model": "imposters",
            "ngram_size": self.config.ngram_size,
            "vocab_size": self.config.vocab_size,
            "iterations": self.config.iterations,
            "feature_fraction": self.config.feature_fraction,
            "seed": self.config.seed,
            "vocab": self.vocab,
            "authors": authors,
        });
        let mut container = Container::new(metadata);
        let mut flat = Vec::with_capacity(self.profiles.len() * self.vocab.len());
        for profile in self.profiles.values() {
            flat.extend_from_slice(profile);
        }
        container.push_f64("profiles", flat);
        container.write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ImpostersModel> {
        let c = Container::read(path)?;
        c.expect_model("imposters")?;
        let config = ImpostersConfig {
            ngram_size: c.meta_usize("ngram_size")?,
            vocab_size: c.meta_usize("vocab_size")?,
            iterations: c.meta_usize("iterations")?,
            feature_fraction: c.meta_f64("feature_fraction")?,
            seed: c.meta_u64("seed")?,
        };
        config.validate().map_err(|e| Error::Container(e.to_string()))?;
        let vocab = c.meta_string_list("vocab")?;
        let authors = c.meta_string_list("authors")?;
        let flat = c.f64_section("profiles")?;
        if authors.is_empty() || flat.len() != authors.len() * vocab.len() {
            return Err(Error::Container("profile section does not match authors × vocab".into()));
        }
        let profiles = authors
            .into_iter()
            .zip(flat.chunks_exact(vocab.len()))
            .map(|(a, row)| (a, row.to_vec()))
            .collect();
        Ok(ImpostersModel { config, vocab, profiles })
    }
}

/// Number of features drawn per round: `ceil(fraction * len)`, at least 1.
pub(crate) fn subset_size(fraction: f64, len: usize) -> usize {
    ((fraction * len as f64).ceil() as usize).clamp(1, len)
}

/// Partial Fisher-Yates: after the call the first `k` positions of `indices`
/// hold a uniform random `k`-subset (in sampled order). Consumes exactly
/// `k` generator draws.
pub(crate) fn partial_shuffle(indices: &mut [usize], k: usize, rng: &mut XorShift64) {
    debug_assert!(k <= indices.len());
    for i in 0..k {
        let j = i + rng.below(indices.len() - i);
        indices.swap(i, j);
    }
}
