//! Index encodings consumed by the convolutional models.

use super::{Alphabet, Tokenizer, Vocabulary, ALPHABET_PAD};

/// Index of the padding row in word embedding matrices.
pub const WORD_PAD: usize = 0;
/// Index of the unknown-word row in word embedding matrices.
pub const WORD_UNK: usize = 1;

/// Offset between vocabulary positions and embedding rows (PAD and UNK come
/// first).
pub const WORD_OFFSET: usize = 2;

/// A document rendered as fixed-length index sequences.
///
/// `word_ids` holds one embedding-row index per token (lowercased, truncated
/// to the word cap, PAD-extended); `char_ids` the same per character with
/// case preserved and digits collapsed. The true lengths record how many
/// leading positions are real input rather than padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextEncoding {
    pub word_ids: Vec<usize>,
    pub char_ids: Vec<usize>,
    pub true_word_len: usize,
    pub true_char_len: usize,
}

/// Encodes a document. `vocabulary` is `None` for character-only models, in
/// which case `word_ids` stays empty and `true_word_len` is zero. Both caps
/// must be at least 1; hybrid word+character models pass
/// `word_len_cap == char_len_cap` so all channels share one sequence length.
pub fn encode_text(
    text: &str,
    vocabulary: Option<&Vocabulary>,
    alphabet: &Alphabet,
    word_len_cap: usize,
    char_len_cap: usize,
) -> TextEncoding {
    assert!(word_len_cap >= 1 && char_len_cap >= 1, "length caps must be at least 1");

    let (word_ids, true_word_len) = match vocabulary {
        None => (Vec::new(), 0),
        Some(vocab) => {
            let tokens = Tokenizer::default().tokenize(text);
            let mut ids: Vec<usize> = tokens
                .iter()
                .take(word_len_cap)
                .map(|tok| vocab.position(tok).map_or(WORD_UNK, |p| p + WORD_OFFSET))
                .collect();
            let true_len = ids.len();
            ids.resize(word_len_cap, WORD_PAD);
            (ids, true_len)
        }
    };

    let mut char_ids: Vec<usize> =
        text.chars().take(char_len_cap).map(|c| alphabet.encode(c)).collect();
    let true_char_len = char_ids.len();
    char_ids.resize(char_len_cap, ALPHABET_PAD);

    TextEncoding { word_ids, char_ids, true_word_len, true_char_len }
}
