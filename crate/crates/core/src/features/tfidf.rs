//! tf-idf over stemmed unigrams.

use std::collections::HashMap;

use super::{porter_stem, Tokenizer, Vocabulary};
use crate::error::{Error, Result};

/// Counts of stemmed, lowercased unigrams of `text`.
pub fn stemmed_counts(text: &str) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for tok in Tokenizer::default().tokenize(text) {
        *counts.entry(porter_stem(&tok)).or_insert(0) += 1;
    }
    counts
}

/// tf-idf vectorizer fitted on a training set.
///
/// Term frequency is the raw in-document count (set `log_tf` for the
/// `1 + ln(tf)` variant), inverse document frequency is the smoothed
/// `ln((1 + N) / (1 + df)) + 1`, and every feature is scaled by the inverse
/// of its population standard deviation over the training set so each has
/// unit variance (features that are constant on the training set keep scale
/// 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    scale: Vec<f64>,
    log_tf: bool,
    n_docs: usize,
}

impl TfidfModel {
    pub fn fit(train_texts: &[&str], vocab_size: usize) -> Result<Self> {
        TfidfModel::fit_with(train_texts, vocab_size, false)
    }

    pub fn fit_with(train_texts: &[&str], vocab_size: usize, log_tf: bool) -> Result<Self> {
        if train_texts.is_empty() {
            return Err(Error::EmptyCorpus("tf-idf needs at least one training document".into()));
        }
        let doc_counts: Vec<HashMap<String, u64>> =
            train_texts.iter().map(|t| stemmed_counts(t)).collect();
        let token_lists: Vec<Vec<String>> = doc_counts
            .iter()
            .map(|counts| {
                counts
                    .iter()
                    .flat_map(|(w, &c)| std::iter::repeat(w.clone()).take(c as usize))
                    .collect()
            })
            .collect();
        let vocabulary =
            Vocabulary::fit(token_lists.iter().map(|t| t.as_slice()), vocab_size)?;

        let n = train_texts.len();
        let mut df = vec![0usize; vocabulary.len()];
        for counts in &doc_counts {
            for (word, _) in counts {
                if let Some(p) = vocabulary.position(word) {
                    df[p] += 1;
                }
            }
        }
        let idf: Vec<f64> = df
            .iter()
            .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
            .collect();

        // Population standard deviation of each unscaled feature over the
        // training documents, zeros included.
        let mut sum = vec![0.0f64; vocabulary.len()];
        let mut sum_sq = vec![0.0f64; vocabulary.len()];
        for counts in &doc_counts {
            for (word, &c) in counts {
                if let Some(p) = vocabulary.position(word) {
                    let x = tf_value(c, log_tf) * idf[p];
                    sum[p] += x;
                    sum_sq[p] += x * x;
                }
            }
        }
        let scale: Vec<f64> = (0..vocabulary.len())
            .map(|p| {
                let mean = sum[p] / n as f64;
                let var = (sum_sq[p] / n as f64 - mean * mean).max(0.0);
                let sd = var.sqrt();
                if sd > 1e-12 {
                    1.0 / sd
                } else {
                    1.0
                }
            })
            .collect();

        Ok(TfidfModel { vocabulary, idf, scale, log_tf, n_docs: n })
    }

    /// Restores a fitted model from its parts (container deserialization).
    pub fn from_parts(
        vocabulary: Vocabulary,
        idf: Vec<f64>,
        scale: Vec<f64>,
        log_tf: bool,
        n_docs: usize,
    ) -> Self {
        TfidfModel { vocabulary, idf, scale, log_tf, n_docs }
    }

    /// Sparse scaled tf-idf vector of `text`, sorted by feature index.
    /// Words outside the training vocabulary are dropped.
    pub fn transform(&self, text: &str) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = stemmed_counts(text)
            .into_iter()
            .filter_map(|(word, c)| {
                self.vocabulary
                    .position(&word)
                    .map(|p| (p, tf_value(c, self.log_tf) * self.idf[p] * self.scale[p]))
            })
            .collect();
        out.sort_by_key(|&(p, _)| p);
        out
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn log_tf(&self) -> bool {
        self.log_tf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

fn tf_value(count: u64, log_tf: bool) -> f64 {
    if log_tf {
        1.0 + (count as f64).ln()
    } else {
        count as f64
    }
}
