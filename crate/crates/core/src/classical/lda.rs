//! Latent Dirichlet Allocation trained by collapsed Gibbs sampling.
//!
//! Training runs plain collapsed Gibbs over lowercased tokens: assignments
//! are initialized uniformly at random (documents in input order, tokens
//! left to right), then each sweep revisits every token in that same order,
//! removes it from the counts and resamples its topic with probability
//! proportional to `(n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)`.
//! Unknown words (outside the fitted vocabulary) are dropped.
//!
//! Inference folds a new document in against frozen topic-word counts: the
//! document gets its own assignment vector and doc-topic counts, the global
//! counts never change, and the returned distribution is the smoothed
//! `(n_dk + alpha) / (n_d + K*alpha)` averaged over the last few sweeps.
//! Fold-in draws from a generator seeded with `derive_seed(seed,
//! FOLD_IN_STREAM)` at every call, so inference is a pure function of the
//! model and the text.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Tokenizer, Vocabulary};
use crate::rng::{derive_seed, XorShift64};

/// Stream id mixed into the model seed for fold-in draws.
pub const FOLD_IN_STREAM: u64 = 0xF01D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub topics: usize,
    pub vocab_size: usize,
    /// Document-topic smoothing; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    /// Topic-word smoothing.
    pub beta: f64,
    pub train_sweeps: usize,
    pub infer_sweeps: usize,
    /// How many of the final fold-in sweeps are averaged into the returned
    /// distribution.
    pub infer_average_last: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 300,
            vocab_size: 30_000,
            alpha: None,
            beta: 0.01,
            train_sweeps: 2_000,
            infer_sweeps: 50,
            infer_average_last: 10,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn resolved_alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidParameter("topic count must be positive".into()));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidParameter("vocabulary size must be positive".into()));
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
            }
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.infer_sweeps == 0 {
            return Err(Error::InvalidParameter("infer_sweeps must be positive".into()));
        }
        if self.infer_average_last == 0 || self.infer_average_last > self.infer_sweeps {
            return Err(Error::InvalidParameter(
                "infer_average_last must be in 1..=infer_sweeps".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    topics: usize,
    alpha: f64,
    beta: f64,
    infer_sweeps: usize,
    infer_average_last: usize,
    seed: u64,
    vocab: Vocabulary,
    /// Topic counts per word, word-major: entry `w * topics + t`.
    word_topic: Vec<u64>,
    topic_totals: Vec<u64>,
}

/// A trained model plus the smoothed topic distribution of every training
/// document (uniform for documents that lost all tokens to the vocabulary
/// cut).
#[derive(Debug, Clone, PartialEq)]
pub struct LdaTraining {
    pub model: LdaModel,
    pub doc_topics: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn train(texts: &[&str], config: &LdaConfig) -> Result<LdaTraining> {
        config.validate()?;
        if texts.is_empty() {
            return Err(Error::EmptyCorpus("cannot fit topics on zero documents".into()));
        }
        let tokenizer = Tokenizer::default();
        let token_lists: Vec<Vec<String>> = texts.iter().map(|t| tokenizer.tokenize(t)).collect();
        let vocab = Vocabulary::fit(token_lists.iter().map(|v| v.as_slice()), config.vocab_size)?;
        let docs: Vec<Vec<usize>> = token_lists
            .iter()
            .map(|tokens| tokens.iter().filter_map(|t| vocab.position(t)).collect())
            .collect();

        let k = config.topics;
        let alpha = config.resolved_alpha();
        let beta = config.beta;
        let vb = vocab.len() as f64 * beta;
        let mut rng = XorShift64::new(config.seed);

        let mut word_topic = vec![0u64; vocab.len() * k];
        let mut topic_totals = vec![0u64; k];
        let mut doc_topic: Vec<Vec<u64>> = docs.iter().map(|_| vec![0u64; k]).collect();
        let mut assign: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let t = rng.below(k);
                z.push(t);
                doc_topic[d][t] += 1;
                word_topic[w * k + t] += 1;
                topic_totals[t] += 1;
            }
            assign.push(z);
        }

        let mut cumulative = vec![0.0f64; k];
        for _ in 0..config.train_sweeps {
            for d in 0..docs.len() {
                for (i, &w) in docs[d].iter().enumerate() {
                    let old = assign[d][i];
                    doc_topic[d][old] -= 1;
                    word_topic[w * k + old] -= 1;
                    topic_totals[old] -= 1;
                    let row = &word_topic[w * k..(w + 1) * k];
                    let mut total = 0.0;
                    for t in 0..k {
                        total += (doc_topic[d][t] as f64 + alpha) * (row[t] as f64 + beta)
                            / (topic_totals[t] as f64 + vb);
                        cumulative[t] = total;
                    }
                    let r = rng.next_f64() * total;
                    let new = cumulative.iter().position(|&c| r < c).unwrap_or(k - 1);
                    assign[d][i] = new;
                    doc_topic[d][new] += 1;
                    word_topic[w * k + new] += 1;
                    topic_totals[new] += 1;
                }
            }
        }

        let doc_topics = docs
            .iter()
            .zip(&doc_topic)
            .map(|(doc, counts)| smoothed_theta(counts, doc.len(), alpha))
            .collect();
        let model = LdaModel {
            topics: k,
            alpha,
            beta,
            infer_sweeps: config.infer_sweeps,
            infer_average_last: config.infer_average_last,
            seed: config.seed,
            vocab,
            word_topic,
            topic_totals,
        };
        Ok(LdaTraining { model, doc_topics })
    }

    /// Folds `text` in and returns its topic distribution plus a flag that
    /// is set when the text had no in-vocabulary tokens (the distribution is
    /// then uniform).
    pub fn infer(&self, text: &str) -> (Vec<f64>, bool) {
        let k = self.topics;
        let tokens = Tokenizer::default().tokenize(text);
        let ids: Vec<usize> = tokens.iter().filter_map(|t| self.vocab.position(t)).collect();
        if ids.is_empty() {
            return (vec![1.0 / k as f64; k], true);
        }
        let mut rng = XorShift64::new(derive_seed(self.seed, FOLD_IN_STREAM));
        let mut doc_topic = vec![0u64; k];
        let mut z = Vec::with_capacity(ids.len());
        for _ in &ids {
            let t = rng.below(k);
            z.push(t);
            doc_topic[t] += 1;
        }
        let vb = self.vocab.len() as f64 * self.beta;
        let mut cumulative = vec![0.0f64; k];
        let mut average = vec![0.0f64; k];
        let first_kept = self.infer_sweeps - self.infer_average_last;
        for sweep in 0..self.infer_sweeps {
            for (i, &w) in ids.iter().enumerate() {
                let old = z[i];
                doc_topic[old] -= 1;
                let row = &self.word_topic[w * k..(w + 1) * k];
                let mut total = 0.0;
                for t in 0..k {
                    total += (doc_topic[t] as f64 + self.alpha) * (row[t] as f64 + self.beta)
                        / (self.topic_totals[t] as f64 + vb);
                    cumulative[t] = total;
                }
                let r = rng.next_f64() * total;
                let new = cumulative.iter().position(|&c| r < c).unwrap_or(k - 1);
                z[i] = new;
                doc_topic[new] += 1;
            }
            if sweep >= first_kept {
                let theta = smoothed_theta(&doc_topic, ids.len(), self.alpha);
                for (a, t) in average.iter_mut().zip(&theta) {
                    *a += t;
                }
            }
        }
        for a in &mut average {
            *a /= self.infer_average_last as f64;
        }
        (average, false)
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn infer_sweeps(&self) -> usize {
        self.infer_sweeps
    }

    pub fn infer_average_last(&self) -> usize {
        self.infer_average_last
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Count of word `w` under topic `t`.
    pub fn word_topic_count(&self, w: usize, t: usize) -> u64 {
        self.word_topic[w * self.topics + t]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    /// Rebuilds a model from stored state (used when loading containers).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        topics: usize,
        alpha: f64,
        beta: f64,
        infer_sweeps: usize,
        infer_average_last: usize,
        seed: u64,
        vocab: Vocabulary,
        word_topic: Vec<u64>,
        topic_totals: Vec<u64>,
    ) -> Result<LdaModel> {
        if topics == 0 || word_topic.len() != vocab.len() * topics || topic_totals.len() != topics {
            return Err(Error::Container("topic count state is inconsistent".into()));
        }
        let mut sums = vec![0u64; topics];
        for w in 0..vocab.len() {
            for t in 0..topics {
                sums[t] += word_topic[w * topics + t];
            }
        }
        if sums != topic_totals {
            return Err(Error::Container("topic totals do not match word-topic counts".into()));
        }
        Ok(LdaModel {
            topics,
            alpha,
            beta,
            infer_sweeps,
            infer_average_last,
            seed,
            vocab,
            word_topic,
            topic_totals,
        })
    }

    pub(crate) fn word_topic_flat(&self) -> &[u64] {
        &self.word_topic
    }
}

/// `(count + alpha) / (len + K*alpha)` per topic; uniform when `len == 0`.
fn smoothed_theta(counts: &[u64], len: usize, alpha: f64) -> Vec<f64> {
    let k = counts.len() as f64;
    counts.iter().map(|&c| (c as f64 + alpha) / (len as f64 + k * alpha)).collect()
}
