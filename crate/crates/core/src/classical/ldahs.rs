//! Attribution by Hellinger distance between topic distributions.
//!
//! Training fits a topic model on the training texts and represents every
//! author by the topic distribution of their concatenated training texts,
//! obtained by folding the concatenation into the fitted model. An unknown
//! text is folded in the same way and attributed to the author whose
//! profile is nearest in Hellinger distance; the score is `1 - distance`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::classical::lda::{LdaConfig, LdaModel};
use crate::container::Container;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::Prediction;

/// Hellinger distance `sqrt(sum (sqrt(p) - sqrt(q))^2) / sqrt(2)` between
/// two non-negative vectors of equal length. For probability distributions
/// the result lies in `[0, 1]`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    if p.is_empty() {
        return Err(Error::InvalidParameter("distributions must be non-empty".into()));
    }
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a < 0.0 || b < 0.0 {
            return Err(Error::InvalidParameter(
                "distributions must have non-negative components".into(),
            ));
        }
        let d = a.sqrt() - b.sqrt();
        acc += d * d;
    }
    Ok(acc.sqrt() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdahsModel {
    lda: LdaModel,
    author_topics: BTreeMap<String, Vec<f64>>,
}

impl LdahsModel {
    pub fn train(corpus: &Corpus, config: &LdaConfig) -> Result<LdahsModel> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus("cannot train on an empty corpus".into()));
        }
        let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
        let trained = LdaModel::train(&texts, config)?;
        let mut author_topics = BTreeMap::new();
        for author in corpus.authors() {
            let concatenated = corpus
                .docs_of(author)
                .iter()
                .map(|&d| texts[d])
                .collect::<Vec<_>>()
                .join(" ");
            let (profile, starved) = trained.model.infer(&concatenated);
            if starved {
                log::warn!(
                    "author {author:?} has no in-vocabulary tokens; \
                     their profile falls back to the uniform distribution"
                );
            }
            author_topics.insert(author.to_string(), profile);
        }
        Ok(LdahsModel { lda: trained.model, author_topics })
    }

    /// Attributes `text` to the author with the nearest topic profile. A
    /// text with no in-vocabulary tokens folds in to the uniform
    /// distribution and the prediction is marked low-confidence.
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let (theta, starved) = self.lda.infer(text);
        let mut best: Option<(&str, f64)> = None;
        for (author, profile) in &self.author_topics {
            let d = hellinger(&theta, profile)?;
            if best.map_or(true, |(_, b)| d < b) {
                best = Some((author, d));
            }
        }
        let (author, distance) = best.expect("trained model has authors");
        Ok(Prediction { author: author.to_string(), score: 1.0 - distance, low_confidence: starved })
    }

    pub fn lda(&self) -> &LdaModel {
        &self.lda
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_topics.keys().map(|s| s.as_str())
    }

    pub fn author_profile(&self, author: &str) -> Option<&[f64]> {
        self.author_topics.get(author).map(|v| v.as_slice())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let authors: Vec<&String> = self.author_topics.keys().collect();
        let metadata = serde_json::json!({
            "model": "ldah-s",
            "topics": self.lda.topics(),
            "alpha": self.lda.alpha(),
            "beta": self.lda.beta(),
            "infer_sweeps": self.lda.infer_sweeps(),
            "infer_average_last": self.lda.infer_average_last(),
            "seed": self.lda.seed(),
            "vocab": self.lda.vocab().entries(),
            "vocab_max_size": self.lda.vocab().max_size(),
            "authors": authors,
        });
        let mut container = Container::new(metadata);
        container.push_i64(
            "word_topic",
            self.lda.word_topic_flat().iter().map(|&c| c as i64).collect(),
        );
        container
            .push_i64("topic_totals", self.lda.topic_totals().iter().map(|&c| c as i64).collect());
        let mut flat = Vec::with_capacity(self.author_topics.len() * self.lda.topics());
        for profile in self.author_topics.values() {
            flat.extend_from_slice(profile);
        }
        container.push_f64("author_topics", flat);
        container.write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LdahsModel> {
        let c = Container::read(path)?;
        c.expect_model("ldah-s")?;
        let topics = c.meta_usize("topics")?;
        let vocab = Vocabulary::from_entries(
            c.meta_string_list("vocab")?,
            c.meta_usize("vocab_max_size")?,
        );
        let word_topic: Vec<u64> =
            c.i64_section("word_topic")?.iter().map(|&x| x as u64).collect();
        let topic_totals: Vec<u64> =
            c.i64_section("topic_totals")?.iter().map(|&x| x as u64).collect();
        let lda = LdaModel::from_parts(
            topics,
            c.meta_f64("alpha")?,
            c.meta_f64("beta")?,
            c.meta_usize("infer_sweeps")?,
            c.meta_usize("infer_average_last")?,
            c.meta_u64("seed")?,
            vocab,
            word_topic,
            topic_totals,
        )?;
        let authors = c.meta_string_list("authors")?;
        let flat = c.f64_section("author_topics")?;
        if authors.is_empty() || flat.len() != authors.len() * topics {
            return Err(Error::Container("author profiles do not match authors × topics".into()));
        }
        let author_topics = authors
            .into_iter()
            .zip(flat.chunks_exact(topics))
            .map(|(a, row)| (a, row.to_vec()))
            .collect();
        Ok(LdahsModel { lda, author_topics })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    #[test]
    fn hellinger_of_identical_distributions_is_zero() {
        let p = [0.25, 0.25, 0.5];
        assert!(hellinger(&p, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn hellinger_of_disjoint_distributions_is_one() {
        let p = [1.0, 0.0];
        let q = [0.0, 1.0];
        assert!((hellinger(&p, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hellinger_half_half_versus_point_mass() {
        let d = hellinger(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((d - 0.5411961001461969).abs() < 1e-9, "got {d}");
    }

    #[test]
    fn hellinger_is_symmetric() {
        let p = [0.1, 0.6, 0.3];
        let q = [0.3, 0.3, 0.4];
        assert_eq!(hellinger(&p, &q).unwrap(), hellinger(&q, &p).unwrap());
    }

    #[test]
    fn hellinger_rejects_bad_inputs() {
        assert!(matches!(
            hellinger(&[0.5, 0.5], &[1.0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(hellinger(&[], &[]).is_err());
        assert!(hellinger(&[-0.1, 1.1], &[0.5, 0.5]).is_err());
    }

    fn topic_corpus() -> Corpus {
        let mut docs = Vec::new();
        for _ in 0..6 {
            docs.push(Document::new("fruit", "apple banana pear plum cherry apple banana pear"));
            docs.push(Document::new("motor", "engine wheel gear piston brake engine wheel gear"));
        }
        Corpus::from_documents(docs)
    }

    fn small_config() -> LdaConfig {
        LdaConfig {
            topics: 2,
            vocab_size: 100,
            alpha: Some(0.1),
            beta: 0.01,
            train_sweeps: 200,
            infer_sweeps: 30,
            infer_average_last: 10,
            seed: 5,
        }
    }

    #[test]
    fn attributes_by_topic() {
        let model = LdahsModel::train(&topic_corpus(), &small_config()).unwrap();
        let p = model.predict("banana cherry plum apple pear").unwrap();
        assert_eq!(p.author, "fruit");
        assert!(!p.low_confidence);
        assert!(p.score > 0.5);
        assert_eq!(model.predict("piston brake wheel engine gear").unwrap().author, "motor");
    }

    #[test]
    fn starved_text_is_flagged() {
        let model = LdahsModel::train(&topic_corpus(), &small_config()).unwrap();
        let p = model.predict("zzz qqq").unwrap();
        assert!(p.low_confidence);
    }

    #[test]
    fn empty_text_is_an_error() {
        let model = LdahsModel::train(&topic_corpus(), &small_config()).unwrap();
        assert!(matches!(model.predict(""), Err(Error::EmptyText)));
    }

    #[test]
    fn author_profiles_are_normalized() {
        let model = LdahsModel::train(&topic_corpus(), &small_config()).unwrap();
        for author in ["fruit", "motor"] {
            let sum: f64 = model.author_profile(author).unwrap().iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ldahs.atrb");
        let model = LdahsModel::train(&topic_corpus(), &small_config()).unwrap();
        model.save(&path).unwrap();
        let back = LdahsModel::load(&path).unwrap();
        assert_eq!(model, back);
        assert_eq!(
            model.predict("apple banana engine").unwrap(),
            back.predict("apple banana engine").unwrap()
        );
    }
}
