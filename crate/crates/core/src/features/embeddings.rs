//! Pre-trained word vector files.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Word vectors loaded from the plain-text format `word v1 v2 ... vk`, one
/// word per line, space separated. The dimension is taken from the first
/// line; later lines with a different dimension are an error.
#[derive(Debug, Clone)]
pub struct WordEmbeddings {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordEmbeddings {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts
                .next()
                .ok_or_else(|| Error::malformed(path, idx + 1, "blank embedding line"))?
                .to_string();
            let values: Vec<f64> = parts
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::malformed(path, idx + 1, format!("bad float {v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if values.is_empty() {
                return Err(Error::malformed(path, idx + 1, "embedding line has no values"));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::malformed(
                        path,
                        idx + 1,
                        format!("expected {d} values, found {}", values.len()),
                    ))
                }
                _ => {}
            }
            vectors.insert(word, values);
        }
        let dim = dim.ok_or_else(|| Error::malformed(path, 0, "embedding file is empty"))?;
        Ok(WordEmbeddings { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_words_and_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "hello 0.1 0.2 0.3").unwrap();
        writeln!(f, "world -1 2 3.5").unwrap();
        drop(f);
        let emb = WordEmbeddings::load(&path).unwrap();
        assert_eq!(emb.dim(), 3);
        assert_eq!(emb.get("hello"), Some(&[0.1, 0.2, 0.3][..]));
        assert_eq!(emb.get("mars"), None);
    }

    #[test]
    fn inconsistent_dimensions_are_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "a 1 2\nb 1 2 3\n").unwrap();
        let err = WordEmbeddings::load(&path).unwrap_err();
        assert!(err.to_string().contains("expected 2 values"));
    }
}
