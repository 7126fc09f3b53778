//! Whitespace tokenization with punctuation splitting.

use serde::{Deserialize, Serialize};

/// Splits text on Unicode whitespace, then splits leading and trailing
/// punctuation runs off each chunk as separate tokens. Interior punctuation
/// is kept, so contractions like `don't` survive as single tokens while
/// `stop...` becomes `stop` + `...`. A chunk consisting entirely of
/// punctuation (an emoticon, an ellipsis) is one token.
///
/// "Punctuation" here means any non-alphanumeric character; the test for a
/// word character is `char::is_alphanumeric`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    /// Lowercase every token. Word-level pipelines enable this; character
    /// pipelines keep case and do not use a tokenizer at all.
    pub lowercase: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer { lowercase: true }
    }
}

impl Tokenizer {
    pub fn new(lowercase: bool) -> Self {
        Tokenizer { lowercase }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for_each_token(text, |tok| {
            out.push(if self.lowercase { tok.to_lowercase() } else { tok.to_string() });
        });
        out
    }

    /// Number of tokens `tokenize` would produce, without allocating them.
    pub fn count_tokens(&self, text: &str) -> usize {
        let mut n = 0;
        for_each_token(text, |_| n += 1);
        n
    }
}

fn for_each_token(text: &str, mut f: impl FnMut(&str)) {
    for chunk in text.split_whitespace() {
        let mut first_word = None;
        let mut last_word_end = 0;
        for (i, c) in chunk.char_indices() {
            if c.is_alphanumeric() {
                if first_word.is_none() {
                    first_word = Some(i);
                }
                last_word_end = i + c.len_utf8();
            }
        }
        match first_word {
            // No word characters at all: the whole chunk is one token.
            None => f(chunk),
            Some(start) => {
                if start > 0 {
                    f(&chunk[..start]);
                }
                f(&chunk[start..last_word_end]);
                if last_word_end < chunk.len() {
                    f(&chunk[last_word_end..]);
                }
            }
        }
    }
}
