//! Stylometric feature extraction: tokenization, stemming, character
//! n-grams, frequency profiles, tf-idf vectors, alphabets and the index
//! encodings consumed by the convolutional models.

mod alphabet;
mod embeddings;
mod encoding;
mod ngrams;
mod stem;
mod tfidf;
mod tokenizer;
mod vocab;

pub use alphabet::{Alphabet, Symbol, ALPHABET_PAD, ALPHABET_UNK};
pub use embeddings::WordEmbeddings;
pub use encoding::{encode_text, TextEncoding, WORD_OFFSET, WORD_PAD, WORD_UNK};
pub use ngrams::{build_profile, char_ngrams, top_ngrams, NgramProfile};
pub use stem::porter_stem;
pub use tfidf::{stemmed_counts, TfidfModel};
pub use tokenizer::Tokenizer;
pub use vocab::Vocabulary;
