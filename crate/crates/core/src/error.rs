//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line of an input file failed to parse or validate.
    #[error("{path}:{line}: {message}")]
    MalformedLine { path: PathBuf, line: usize, message: String },

    #[error("corpus is empty: {0}")]
    EmptyCorpus(String),

    #[error("requested {requested} authors but the corpus has only {available}")]
    NotEnoughAuthors { requested: usize, available: usize },

    #[error("split fractions leave no training documents for: {}", offenders.join(", "))]
    SplitInfeasible { offenders: Vec<String> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("text is empty")]
    EmptyText,

    #[error("all voting rounds abstained: none of the sampled features occur in the text")]
    FeatureStarvation,

    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input of length {n} is shorter than the filter window {h}")]
    WindowTooLarge { n: usize, h: usize },

    #[error("empty feature map")]
    EmptyFeatureMap,

    #[error("encoding does not match the model: {0}")]
    EncodingMismatch(String),

    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    EmbeddingDim { expected: usize, found: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("no prediction records to score")]
    EmptyRecords,

    #[error("model container: {0}")]
    Container(String),

    #[error("incompatible input: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::MalformedLine { path: path.into(), line, message: message.into() }
    }
}
