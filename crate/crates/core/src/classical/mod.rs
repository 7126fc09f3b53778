//! Classical attribution baselines: profile intersection, randomized
//! feature-subset voting, topic-distribution distance and a linear SVM over
//! stemmed unigrams.
//!
//! Every model trains on a [`crate::corpus::Corpus`], predicts single texts
//! through a `predict(&str) -> Result<Prediction>` method with
//! lexicographic-first tie-breaking, and round-trips through the shared
//! binary container.

mod imposters;
mod lda;
mod ldahs;
mod scap;
mod svm;

pub use imposters::{ImpostersConfig, ImpostersModel};
pub use lda::{LdaConfig, LdaModel, LdaTraining};
pub use ldahs::{hellinger, LdahsModel};
pub use scap::ScapModel;
pub use svm::{SvmConfig, SvmModel};
