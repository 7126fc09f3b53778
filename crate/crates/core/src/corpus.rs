//! Corpora: loading, filtering, splitting, statistics and synthetic data.
//!
//! The on-disk format is JSON Lines: one object per document with the keys
//! `author` and `text`; unknown keys are ignored. All derived corpora keep
//! documents in their original relative order, and every randomized
//! operation draws from the crate's documented xorshift64* generator, so a
//! `(corpus, spec)` pair always yields bit-identical results.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Tokenizer;
use crate::rng::XorShift64;

/// One attributed text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub author_id: String,
    pub text: String,
    /// Token count under the default tokenizer, cached at construction.
    pub token_count: usize,
}

impl Document {
    pub fn new(author_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let token_count = Tokenizer::default().count_tokens(&text);
        Document { author_id: author_id.into(), text, token_count }
    }
}

/// A set of documents with an author index. The index always covers exactly
/// the documents present; an author exists iff at least one document carries
/// its id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    author_index: BTreeMap<String, Vec<usize>>,
}

/// Fractions and seed controlling a stratified train/dev/test split.
///
/// The test fraction must lie strictly between 0 and 1; the dev fraction may
/// additionally be 0 (no held-out dev set). Either way the split must leave
/// at least one training document for every author (checked per author at
/// split time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub dev_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let t = self.test_fraction;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("test_fraction must be in (0, 1), got {t}")));
        }
        let d = self.dev_fraction;
        if !(0.0..1.0).contains(&d) {
            return Err(Error::InvalidParameter(format!("dev_fraction must be in [0, 1), got {d}")));
        }
        Ok(())
    }
}

/// Summary statistics in the shape attribution datasets are usually
/// described: author count, document count, median and population standard
/// deviation of documents per author, and median tokens per document. Even
/// element counts take the mean of the two middle values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub authors: usize,
    pub documents: usize,
    pub median_docs_per_author: f64,
    pub docs_per_author_stddev: f64,
    pub median_tokens_per_doc: f64,
}

#[derive(Deserialize)]
struct RawDocument {
    author: String,
    text: String,
}

#[derive(Serialize)]
struct RawDocumentRef<'a> {
    author: &'a str,
    text: &'a str,
}

impl Corpus {
    pub fn from_documents(documents: Vec<Document>) -> Self {
        let mut author_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            author_index.entry(doc.author_id.clone()).or_default().push(i);
        }
        Corpus { documents, author_index }
    }

    /// Reads a JSONL corpus. Every line must parse to an object with
    /// non-empty `author` and `text`; errors name the offending line. An
    /// empty file (or one with only blank lines) is an error.
    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut documents = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawDocument = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(path, idx + 1, e.to_string()))?;
            if raw.author.is_empty() {
                return Err(Error::malformed(path, idx + 1, "empty author id"));
            }
            if raw.text.is_empty() {
                return Err(Error::malformed(path, idx + 1, "empty text"));
            }
            documents.push(Document::new(raw.author, raw.text));
        }
        if documents.is_empty() {
            return Err(Error::EmptyCorpus(format!("{} holds no documents", path.display())));
        }
        Ok(Corpus::from_documents(documents))
    }

    /// Writes the corpus back out as JSONL (`author` and `text` keys only).
    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for doc in &self.documents {
            let raw = RawDocumentRef { author: &doc.author_id, text: &doc.text };
            out.push_str(&serde_json::to_string(&raw).expect("document serializes"));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn author_count(&self) -> usize {
        self.author_index.len()
    }

    /// Author ids in lexicographic order.
    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(|s| s.as_str())
    }

    /// Positions of an author's documents within `documents()`.
    pub fn docs_of(&self, author: &str) -> &[usize] {
        self.author_index.get(author).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// An author's texts joined by a single newline, in document order.
    pub fn author_text(&self, author: &str) -> String {
        let texts: Vec<&str> =
            self.docs_of(author).iter().map(|&i| self.documents[i].text.as_str()).collect();
        texts.join("\n")
    }

    /// Keeps documents with at least `min_tokens` tokens. Authors whose
    /// documents all fall below the threshold disappear. Filtering
    /// everything away is an error; applying the same filter twice is a
    /// no-op.
    pub fn filter_min_tokens(&self, min_tokens: usize) -> Result<Corpus> {
        if min_tokens == 0 {
            return Err(Error::InvalidParameter("min_tokens must be positive".into()));
        }
        let kept: Vec<Document> =
            self.documents.iter().filter(|d| d.token_count >= min_tokens).cloned().collect();
        if kept.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "no document has at least {min_tokens} tokens"
            )));
        }
        Ok(Corpus::from_documents(kept))
    }

    /// Keeps the `n` authors with the most documents, ties broken
    /// lexicographically by author id.
    pub fn top_n_authors(&self, n: usize) -> Result<Corpus> {
        if n == 0 {
            return Err(Error::InvalidParameter("author count must be positive".into()));
        }
        if n > self.author_count() {
            return Err(Error::NotEnoughAuthors { requested: n, available: self.author_count() });
        }
        let mut ranked: Vec<(&String, usize)> =
            self.author_index.iter().map(|(a, docs)| (a, docs.len())).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let keep: std::collections::HashSet<&String> =
            ranked.into_iter().take(n).map(|(a, _)| a).collect();
        let kept: Vec<Document> =
            self.documents.iter().filter(|d| keep.contains(&d.author_id)).cloned().collect();
        Ok(Corpus::from_documents(kept))
    }

    /// Stratified train/dev/test split.
    ///
    /// Per author (visited in lexicographic order) the documents are
    /// shuffled with xorshift64* seeded from `spec.seed`, then
    /// `round_half_up(test_fraction * docs)` go to test and
    /// `round_half_up(dev_fraction * remaining)` of the remaining pool go to
    /// dev. If any author would end up without a training document the
    /// split fails, listing the offenders. The three parts partition the
    /// input and preserve original document order.
    pub fn stratified_split(&self, spec: &SplitSpec) -> Result<(Corpus, Corpus, Corpus)> {
        spec.validate()?;
        let mut rng = XorShift64::new(spec.seed);
        let mut train_idx = Vec::new();
        let mut dev_idx = Vec::new();
        let mut test_idx = Vec::new();
        let mut offenders = Vec::new();
        for (author, positions) in &self.author_index {
            let mut pos = positions.clone();
            rng.shuffle(&mut pos);
            let n = pos.len();
            let n_test = round_half_up(spec.test_fraction * n as f64);
            let pool = n.saturating_sub(n_test);
            let n_dev = round_half_up(spec.dev_fraction * pool as f64);
            if n_test + n_dev >= n {
                offenders.push(author.clone());
                continue;
            }
            test_idx.extend_from_slice(&pos[..n_test]);
            dev_idx.extend_from_slice(&pos[n_test..n_test + n_dev]);
            train_idx.extend_from_slice(&pos[n_test + n_dev..]);
        }
        if !offenders.is_empty() {
            return Err(Error::SplitInfeasible { offenders });
        }
        Ok((self.subset(train_idx), self.subset(dev_idx), self.subset(test_idx)))
    }

    fn subset(&self, mut positions: Vec<usize>) -> Corpus {
        positions.sort_unstable();
        Corpus::from_documents(positions.into_iter().map(|i| self.documents[i].clone()).collect())
    }

    /// Summary statistics; errors on an empty corpus.
    pub fn stats(&self) -> Result<CorpusStats> {
        if self.is_empty() {
            return Err(Error::EmptyCorpus("cannot summarize an empty corpus".into()));
        }
        let per_author: Vec<f64> =
            self.author_index.values().map(|docs| docs.len() as f64).collect();
        let tokens: Vec<f64> = self.documents.iter().map(|d| d.token_count as f64).collect();
        let mean = per_author.iter().sum::<f64>() / per_author.len() as f64;
        let var =
            per_author.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / per_author.len() as f64;
        Ok(CorpusStats {
            authors: self.author_count(),
            documents: self.len(),
            median_docs_per_author: median(per_author),
            docs_per_author_stddev: var.sqrt(),
            median_tokens_per_doc: median(tokens),
        })
    }
}

/// Rounds to the nearest integer with halves rounding up.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Median with the mean-of-middles rule for even lengths. The input must be
/// non-empty.
fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN token counts"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// What distinguishes the authors of a synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignatureMode {
    /// Each author salts their documents with a unique punctuation trigram
    /// (an emoticon of sorts); word choice is shared.
    Char,
    /// Each author repeats a unique rare word; everything else is shared.
    Word,
    /// Each author draws most tokens from a private topic word set.
    Topic,
}

impl SignatureMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "char" => Ok(SignatureMode::Char),
            "word" => Ok(SignatureMode::Word),
            "topic" => Ok(SignatureMode::Topic),
            other => Err(Error::InvalidParameter(format!(
                "unknown signature mode {other:?} (expected char, word or topic)"
            ))),
        }
    }
}

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub authors: usize,
    pub docs_per_author: usize,
    pub mode: SignatureMode,
    pub seed: u64,
}

/// Shared filler vocabulary for synthetic documents: ordinary words with no
/// author signal.
const BASE_WORDS: &[&str] = &[
    "the", "and", "with", "from", "about", "house", "river", "window", "morning", "evening",
    "letter", "friend", "garden", "coffee", "road", "light", "shadow", "music", "paper", "stone",
    "quiet", "early", "often", "never", "always", "under", "between", "before", "after", "around",
    "walked", "wrote", "looked", "found", "heard", "asked", "turned", "opened", "closed", "waited",
];

/// Symbols used to assemble per-author signature trigrams in char mode.
const SIGNATURE_SYMBOLS: &[char] = &[
    ':', ';', '^', '~', '*', '=', '<', '>', '(', ')', '[', ']', '{', '}', '-', '_', '!', '?', '+', '%',
];

/// Builds a deterministic corpus whose authors are separable by design.
///
/// Documents are 30-60 tokens long. In char mode every document of author
/// `i` contains that author's punctuation trigram three times and no other
/// author's trigram ever; word mode behaves the same with a unique rare
/// word; topic mode draws 70% of each document's tokens (exactly,
/// `ceil(0.7 * len)`) from the author's private 20-word topic set and the
/// rest from the shared filler list.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Corpus> {
    if spec.authors == 0 || spec.docs_per_author == 0 {
        return Err(Error::InvalidParameter("author and document counts must be positive".into()));
    }
    let mut rng = XorShift64::new(spec.seed);
    let mut documents = Vec::with_capacity(spec.authors * spec.docs_per_author);
    for author in 0..spec.authors {
        let author_id = format!("author-{author:03}");
        for _ in 0..spec.docs_per_author {
            let len = 30 + rng.below(31);
            let tokens = match spec.mode {
                SignatureMode::Char => {
                    salted_tokens(len, &signature_trigram(author), &mut rng)
                }
                SignatureMode::Word => salted_tokens(len, &signature_word(author), &mut rng),
                SignatureMode::Topic => topic_tokens(len, author, &mut rng),
            };
            documents.push(Document::new(author_id.clone(), tokens.join(" ")));
        }
    }
    Ok(Corpus::from_documents(documents))
}

/// The unique punctuation trigram of author `i`: three symbols picked by the
/// base-20 digits of `i`. Base words contain no symbol characters, so one
/// author's trigram can never appear in another author's documents.
fn signature_trigram(author: usize) -> String {
    let b = SIGNATURE_SYMBOLS.len();
    [author / (b * b) % b, author / b % b, author % b]
        .into_iter()
        .map(|d| SIGNATURE_SYMBOLS[d])
        .collect()
}

/// The unique rare word of author `i` ("zq" + base-26 digits + "x"); the
/// filler list contains nothing starting with "zq".
fn signature_word(author: usize) -> String {
    let mut digits = Vec::new();
    let mut n = author;
    loop {
        digits.push(char::from(b'a' + (n % 26) as u8));
        n /= 26;
        if n == 0 {
            break;
        }
    }
    digits.reverse();
    format!("zq{}x", digits.into_iter().collect::<String>())
}

/// Filler tokens with the signature token planted at three distinct random
/// positions.
fn salted_tokens(len: usize, signature: &str, rng: &mut XorShift64) -> Vec<String> {
    let mut tokens: Vec<String> =
        (0..len).map(|_| BASE_WORDS[rng.below(BASE_WORDS.len())].to_string()).collect();
    let mut positions: Vec<usize> = (0..len).collect();
    rng.shuffle(&mut positions);
    for &p in positions.iter().take(3) {
        tokens[p] = signature.to_string();
    }
    tokens
}

/// Tokens with exactly `ceil(0.7 * len)` draws from the author's topic set,
/// placed at random positions, and filler everywhere else.
fn topic_tokens(len: usize, author: usize, rng: &mut XorShift64) -> Vec<String> {
    let n_topic = (0.7 * len as f64).ceil() as usize;
    let mut positions: Vec<usize> = (0..len).collect();
    rng.shuffle(&mut positions);
    let mut tokens = vec![String::new(); len];
    for (rank, &p) in positions.iter().enumerate() {
        tokens[p] = if rank < n_topic {
            topic_word(author, rng.below(TOPIC_WORDS_PER_AUTHOR))
        } else {
            BASE_WORDS[rng.below(BASE_WORDS.len())].to_string()
        };
    }
    tokens
}

/// Size of each author's private topic vocabulary in topic mode.
pub const TOPIC_WORDS_PER_AUTHOR: usize = 20;

/// The `j`-th topic word of author `i`; sets are disjoint across authors by
/// construction.
pub fn topic_word(author: usize, j: usize) -> String {
    format!("t{author}w{j}")
}
