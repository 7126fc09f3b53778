//! One-vs-rest linear SVM over stemmed unigram tf-idf features.
//!
//! Training is plain Pegasos: weights start at zero, the step size is
//! `1 / (reg * t)` with `t` counting examples globally across epochs, and
//! each visit scales the parameter vector by `1 - step * reg` (exactly zero
//! at `t = 1`) before adding `step * y * x` on a margin violation. The bias
//! is handled as one more coordinate with a constant unit feature, so it is
//! regularized and decays like every other weight — an unregularized
//! intercept would keep its early 1/reg-sized kicks forever and wreck the
//! 1/t schedule. Example order is reshuffled every epoch with the model
//! seed, so training is deterministic.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{TfidfModel, Vocabulary};
use crate::rng::XorShift64;
use crate::Prediction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub vocab_size: usize,
    /// Regularization strength (the Pegasos lambda).
    pub reg: f64,
    pub epochs: usize,
    /// Use `1 + ln(count)` instead of the raw count as term frequency.
    pub log_tf: bool,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { vocab_size: 10_000, reg: 0.01, epochs: 10, log_tf: false, seed: 0 }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 {
            return Err(Error::InvalidParameter("vocabulary size must be positive".into()));
        }
        if !(self.reg > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization must be positive, got {}",
                self.reg
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epoch count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    config: SvmConfig,
    tfidf: TfidfModel,
    authors: Vec<String>,
    /// One weight row per author, over the tf-idf vocabulary.
    weights: Vec<Vec<f64>>,
    /// One intercept per author, trained as a constant-one feature.
    bias: Vec<f64>,
}

impl SvmModel {
    pub fn train(corpus: &Corpus, config: &SvmConfig) -> Result<SvmModel> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus("cannot train on an empty corpus".into()));
        }
        let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
        let tfidf = TfidfModel::fit_with(&texts, config.vocab_size, config.log_tf)?;
        let features: Vec<Vec<(usize, f64)>> = texts.iter().map(|t| tfidf.transform(t)).collect();
        let authors: Vec<String> = corpus.authors().map(str::to_string).collect();
        for author in &authors {
            if corpus.docs_of(author).iter().all(|&d| features[d].is_empty()) {
                log::warn!(
                    "author {author:?} has no in-vocabulary features; \
                     their classifier can only learn a bias"
                );
            }
        }
        let labels: Vec<usize> = corpus
            .documents()
            .iter()
            .map(|d| authors.binary_search(&d.author_id).expect("author is indexed"))
            .collect();

        let v = tfidf.vocabulary().len();
        let mut weights = vec![vec![0.0f64; v]; authors.len()];
        let mut bias = vec![0.0f64; authors.len()];
        let mut rng = XorShift64::new(config.seed);
        let mut order: Vec<usize> = (0..features.len()).collect();
        let mut t = 1u64;
        for _ in 0..config.epochs {
            rng.shuffle(&mut order);
            for &d in &order {
                let x = &features[d];
                let step = 1.0 / (config.reg * t as f64);
                let decay = 1.0 - step * config.reg;
                for (a, (w, b)) in weights.iter_mut().zip(&mut bias).enumerate() {
                    let y = if labels[d] == a { 1.0 } else { -1.0 };
                    let decision: f64 =
                        x.iter().map(|&(i, xi)| w[i] * xi).sum::<f64>() + *b;
                    for wi in w.iter_mut() {
                        *wi *= decay;
                    }
                    *b *= decay;
                    if y * decision < 1.0 {
                        for &(i, xi) in x {
                            w[i] += step * y * xi;
                        }
                        *b += step * y;
                    }
                }
                t += 1;
            }
        }
        Ok(SvmModel { config: *config, tfidf, authors, weights, bias })
    }

    /// Per-author decision values `w_a . x + b_a`, in author order.
    pub fn decision_values(&self, text: &str) -> Vec<f64> {
        let x = self.tfidf.transform(text);
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.iter().map(|&(i, xi)| w[i] * xi).sum::<f64>() + b)
            .collect()
    }

    /// Attributes `text` to the author with the highest decision value,
    /// ties falling to the lexicographically smallest id. Texts with no
    /// in-vocabulary features are decided by bias alone and flagged.
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let x = self.tfidf.transform(text);
        let mut best = 0usize;
        let mut best_value = f64::NEG_INFINITY;
        for (a, (w, b)) in self.weights.iter().zip(&self.bias).enumerate() {
            let value: f64 = x.iter().map(|&(i, xi)| w[i] * xi).sum::<f64>() + b;
            if value > best_value {
                best = a;
                best_value = value;
            }
        }
        Ok(Prediction {
            author: self.authors[best].clone(),
            score: best_value,
            low_confidence: x.is_empty(),
        })
    }

    pub fn config(&self) -> &SvmConfig {
        &self.config
    }

    pub fn tfidf(&self) -> &TfidfModel {
        &self.tfidf
    }

    pub fn authors(&self) -> &[String] {
        &self.authors
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let metadata = serde_json::json!({
            "model": "svm-stems",
            "vocab_size": self.config.vocab_size,
            "reg": self.config.reg,
            "epochs": self.config.epochs,
            "log_tf": self.config.log_tf,
            "seed": self.config.seed,
            "n_docs": self.tfidf.n_docs(),
            "vocab": self.tfidf.vocabulary().entries(),
            "vocab_max_size": self.tfidf.vocabulary().max_size(),
            "authors": self.authors,
        });
        let mut container = Container::new(metadata);
        container.push_f64("idf", self.tfidf.idf().to_vec());
        container.push_f64("scale", self.tfidf.scale().to_vec());
        let mut flat = Vec::with_capacity(self.authors.len() * self.tfidf.vocabulary().len());
        for row in &self.weights {
            flat.extend_from_slice(row);
        }
        container.push_f64("weights", flat);
        container.push_f64("bias", self.bias.clone());
        container.write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SvmModel> {
        let c = Container::read(path)?;
        c.expect_model("svm-stems")?;
        let config = SvmConfig {
            vocab_size: c.meta_usize("vocab_size")?,
            reg: c.meta_f64("reg")?,
            epochs: c.meta_usize("epochs")?,
            log_tf: c.meta_bool("log_tf")?,
            seed: c.meta_u64("seed")?,
        };
        config.validate().map_err(|e| Error::Container(e.to_string()))?;
        let vocab = Vocabulary::from_entries(
            c.meta_string_list("vocab")?,
            c.meta_usize("vocab_max_size")?,
        );
        let v = vocab.len();
        let idf = c.f64_section("idf")?.to_vec();
        let scale = c.f64_section("scale")?.to_vec();
        if idf.len() != v || scale.len() != v {
            return Err(Error::Container("idf/scale sections do not match the vocabulary".into()));
        }
        let tfidf =
            TfidfModel::from_parts(vocab, idf, scale, config.log_tf, c.meta_usize("n_docs")?);
        let authors = c.meta_string_list("authors")?;
        let flat = c.f64_section("weights")?;
        if authors.is_empty() || flat.len() != authors.len() * v {
            return Err(Error::Container("weight section does not match authors × vocab".into()));
        }
        let weights = flat.chunks_exact(v).map(|row| row.to_vec()).collect();
        let bias = c.f64_section("bias")?.to_vec();
        if bias.len() != authors.len() {
            return Err(Error::Container("bias section does not match authors".into()));
        }
        Ok(SvmModel { config, tfidf, authors, weights, bias })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn two_author_corpus() -> Corpus {
        Corpus::from_documents(vec![
            Document::new("ann", "running quickly through forests and running again"),
            Document::new("ann", "forests running trails quickly running softly"),
            Document::new("ann", "quickly running forests trails running"),
            Document::new("bob", "cooking dinner slowly with butter and cooking more"),
            Document::new("bob", "butter dinner cooking slowly sauces cooking"),
            Document::new("bob", "slowly cooking butter sauces dinner cooking"),
        ])
    }

    fn fast_config() -> SvmConfig {
        SvmConfig { vocab_size: 100, reg: 0.01, epochs: 20, log_tf: false, seed: 3 }
    }

    #[test]
    fn attributes_separable_authors() {
        let model = SvmModel::train(&two_author_corpus(), &fast_config()).unwrap();
        assert_eq!(model.predict("running through forests").unwrap().author, "ann");
        assert_eq!(model.predict("cooking with butter").unwrap().author, "bob");
    }

    #[test]
    fn fits_the_training_set() {
        let corpus = two_author_corpus();
        let model = SvmModel::train(&corpus, &fast_config()).unwrap();
        for doc in corpus.documents() {
            assert_eq!(model.predict(&doc.text).unwrap().author, doc.author_id);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = two_author_corpus();
        let a = SvmModel::train(&corpus, &fast_config()).unwrap();
        let b = SvmModel::train(&corpus, &fast_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn winner_has_the_top_decision_value() {
        let model = SvmModel::train(&two_author_corpus(), &fast_config()).unwrap();
        let text = "running and cooking";
        let p = model.predict(text).unwrap();
        let values = model.decision_values(text);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(p.score, max);
    }

    #[test]
    fn unknown_words_fall_back_to_bias() {
        let model = SvmModel::train(&two_author_corpus(), &fast_config()).unwrap();
        let p = model.predict("zzz qqq www").unwrap();
        assert!(p.low_confidence);
        let values = model.decision_values("zzz qqq www");
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(p.score, max);
        assert!(model.authors().contains(&p.author));
    }

    #[test]
    fn empty_text_is_an_error() {
        let model = SvmModel::train(&two_author_corpus(), &fast_config()).unwrap();
        assert!(matches!(model.predict(""), Err(Error::EmptyText)));
    }

    #[test]
    fn count_scaling_does_not_change_decisions() {
        // Repeating every text k times scales all raw counts by k;
        // unit-variance scaling absorbs the factor, so decision values on
        // equally scaled probes match the original trajectory.
        let scale = |text: &str| vec![text; 10].join(" ");
        let corpus = two_author_corpus();
        let scaled = Corpus::from_documents(
            corpus
                .documents()
                .iter()
                .map(|d| Document::new(&d.author_id, &scale(&d.text)))
                .collect(),
        );
        let a = SvmModel::train(&corpus, &fast_config()).unwrap();
        let b = SvmModel::train(&scaled, &fast_config()).unwrap();
        for text in ["running through forests", "cooking with butter", "running and cooking"] {
            let da = a.decision_values(text);
            let db = b.decision_values(&scale(text));
            for (x, y) in da.iter().zip(&db) {
                assert!((x - y).abs() < 1e-6, "{text}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        for config in [
            SvmConfig { vocab_size: 0, ..Default::default() },
            SvmConfig { reg: 0.0, ..Default::default() },
            SvmConfig { epochs: 0, ..Default::default() },
        ] {
            assert!(config.validate().is_err());
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("svm.atrb");
        let model = SvmModel::train(&two_author_corpus(), &fast_config()).unwrap();
        model.save(&path).unwrap();
        let back = SvmModel::load(&path).unwrap();
        assert_eq!(model, back);
        assert_eq!(
            model.predict("running dinner").unwrap(),
            back.predict("running dinner").unwrap()
        );
    }
}
