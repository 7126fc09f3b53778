//! Shared fixtures for the criterion benchmarks.

use atrb_core::corpus::{generate_synthetic, SignatureMode, SyntheticSpec};
use atrb_core::Corpus;

/// A small deterministic corpus with character-level author signatures.
pub fn char_corpus(authors: usize, docs_per_author: usize) -> Corpus {
    generate_synthetic(&SyntheticSpec {
        authors,
        docs_per_author,
        mode: SignatureMode::Char,
        seed: 1,
    })
    .expect("synthetic corpus")
}

/// A small deterministic corpus with word-level author signatures.
pub fn word_corpus(authors: usize, docs_per_author: usize) -> Corpus {
    generate_synthetic(&SyntheticSpec {
        authors,
        docs_per_author,
        mode: SignatureMode::Word,
        seed: 2,
    })
    .expect("synthetic corpus")
}
