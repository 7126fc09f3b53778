//! Profile-intersection attribution over character n-grams.
//!
//! Each author is reduced to the set of their `profile_size` most frequent
//! character n-grams (counted over all their texts joined by newlines,
//! whitespace included). An unknown text is reduced the same way and scored
//! against each author by the fraction of its profile the author's profile
//! covers; the best-covered author wins, ties falling to the
//! lexicographically smallest id.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::container::Container;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::build_profile;
use crate::Prediction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScapModel {
    ngram_size: usize,
    profile_size: usize,
    profiles: BTreeMap<String, HashSet<String>>,
}

impl ScapModel {
    pub fn train(corpus: &Corpus, ngram_size: usize, profile_size: usize) -> Result<ScapModel> {
        if ngram_size == 0 {
            return Err(Error::InvalidParameter("n-gram size must be positive".into()));
        }
        if profile_size == 0 {
            return Err(Error::InvalidParameter("profile size must be positive".into()));
        }
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus("cannot train on an empty corpus".into()));
        }
        let mut profiles = BTreeMap::new();
        for author in corpus.authors() {
            let texts: Vec<&str> =
                corpus.docs_of(author).iter().map(|&i| corpus.documents()[i].text.as_str()).collect();
            let profile = build_profile(&texts, ngram_size, profile_size);
            profiles.insert(author.to_string(), profile.top.into_iter().collect());
        }
        Ok(ScapModel { ngram_size, profile_size, profiles })
    }

    /// Attributes `text`. A text too short to contain a single n-gram gets
    /// the lexicographically first author at score zero with the
    /// low-confidence marker set; an empty text is an error.
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let test: HashSet<String> =
            build_profile(&[text], self.ngram_size, self.profile_size).top.into_iter().collect();
        if test.is_empty() {
            let author = self.profiles.keys().next().expect("trained model has authors");
            return Ok(Prediction { author: author.clone(), score: 0.0, low_confidence: true });
        }
        let mut best: Option<(&str, f64)> = None;
        for (author, profile) in &self.profiles {
            let shared = test.iter().filter(|g| profile.contains(g.as_str())).count();
            let score = shared as f64 / test.len() as f64;
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((author, score));
            }
        }
        let (author, score) = best.expect("trained model has authors");
        Ok(Prediction::new(author, score))
    }

    pub fn ngram_size(&self) -> usize {
        self.ngram_size
    }

    pub fn profile_size(&self) -> usize {
        self.profile_size
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(|s| s.as_str())
    }

    pub fn profile(&self, author: &str) -> Option<&HashSet<String>> {
        self.profiles.get(author)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let profiles: serde_json::Map<String, serde_json::Value> = self
            .profiles
            .iter()
            .map(|(author, grams)| {
                let mut sorted: Vec<&String> = grams.iter().collect();
                sorted.sort_unstable();
                (author.clone(), serde_json::json!(sorted))
            })
            .collect();
        let metadata = serde_json::json!({
            "model": "scap",
            "ngram_size": self.ngram_size,
            "profile_size": self.profile_size,
            "profiles": profiles,
        });
        Container::new(metadata).write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ScapModel> {
        let c = Container::read(path)?;
        c.expect_model("scap")?;
        let raw = c
            .meta("profiles")?
            .as_object()
            .ok_or_else(|| Error::Container("metadata key \"profiles\" is not an object".into()))?;
        let mut profiles = BTreeMap::new();
        for (author, grams) in raw {
            let grams = grams
                .as_array()
                .ok_or_else(|| Error::Container(format!("profile of {author:?} is not an array")))?;
            let set: HashSet<String> = grams
                .iter()
                .map(|g| {
                    g.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::Container("profile entry is not a string".into()))
                })
                .collect::<Result<_>>()?;
            profiles.insert(author.clone(), set);
        }
        if profiles.is_empty() {
            return Err(Error::Container("model has no author profiles".into()));
        }
        Ok(ScapModel {
            ngram_size: c.meta_usize("ngram_size")?,
            profile_size: c.meta_usize("profile_size")?,
            profiles,
        })
    }
}
