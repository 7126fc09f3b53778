//! Authorship attribution laboratory.
//!
//! The crate bundles everything needed to run closed-set attribution
//! experiments from the command line or from tests:
//!
//! * [`corpus`] — JSONL corpora, filtering, stratified splits, summary
//!   statistics and deterministic synthetic corpora.
//! * [`features`] — tokenization, Porter stemming, character n-grams,
//!   frequency profiles, tf-idf, alphabets and text-to-index encodings.
//! * [`classical`] — SCAP profile intersection, the Imposters verification
//!   scheme, LDA topic distance (LDAH-S) and a linear SVM over stemmed
//!   unigrams.
//! * [`nnet`] — small convolutional text classifiers over word and character
//!   channels with max-over-time pooling, trained with Adadelta; all math is
//!   plain `f64` and every gradient is checkable by finite differences.
//! * [`eval`] — micro/macro F1, the experiment harness and CSV/SVG reports.
//!
//! Everything is single-threaded and deterministic: given the same inputs,
//! configuration and seeds, every public operation reproduces its output
//! bit for bit.

pub mod classical;
pub mod container;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod nnet;
pub mod rng;

pub use container::Container;
pub use corpus::{generate_synthetic, Corpus, CorpusStats, Document, SignatureMode, SplitSpec, SyntheticSpec};
pub use error::{Error, Result};
pub use eval::{micro_f1, PredictionRecord, RunReport};
pub use features::{Alphabet, TextEncoding, Tokenizer, Vocabulary};
pub use nnet::{ConvModel, TrainConfig, Variant};
pub use rng::XorShift64;

use serde::{Deserialize, Serialize};

/// Outcome of a single attribution query: the chosen author, a
/// method-specific score (higher is more confident) and a marker set when the
/// method had to fall back to an arbitrary answer (for example an unknown
/// text too short to yield any profile features).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub author: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub low_confidence: bool,
}

impl Prediction {
    pub fn new(author: impl Into<String>, score: f64) -> Self {
        Prediction { author: author.into(), score, low_confidence: false }
    }
}
