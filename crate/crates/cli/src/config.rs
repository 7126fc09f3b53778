//! The experiment configuration file.
//!
//! One TOML file describes everything an experiment needs: where the corpus
//! comes from (a JSONL file or the synthetic generator), how it is split,
//! the hyperparameters of every configured method, and what the `train` and
//! `benchmark` commands should do with them. Unknown keys anywhere in the
//! file are rejected so a typo cannot silently fall back to a default.
//!
//! Method sections are named exactly like the methods they configure:
//! `[methods.scap]`, `[methods.imposters]`, `[methods.ldah-s]`,
//! `[methods.svm-stems]`, and one `[methods.cnn-*]` section per network
//! variant (`cnn-word`, `cnn-char`, `cnn-word-word`, `cnn-word-char`,
//! `cnn-word-word-char`). Omitted network knobs fall back to the variant's
//! published defaults (300-dimensional embeddings, windows 6/7/8 with 100
//! maps each, dropout 0.5, masked pooling).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use atrb_core::classical::{ImpostersConfig, LdaConfig, SvmConfig};
use atrb_core::corpus::{generate_synthetic, SignatureMode, SyntheticSpec};
use atrb_core::eval::MethodSpec;
use atrb_core::features::Alphabet;
use atrb_core::nnet::{ModelConfig, TrainConfig, Variant};
use atrb_core::{Corpus, SplitSpec};

use crate::{AppError, AppResult};

/// Order in which configured methods run when no explicit list is given.
pub const METHOD_ORDER: [&str; 9] = [
    "scap",
    "imposters",
    "ldah-s",
    "svm-stems",
    "cnn-word",
    "cnn-char",
    "cnn-word-word",
    "cnn-word-char",
    "cnn-word-word-char",
];

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub split: SplitSection,
    #[serde(default)]
    pub methods: MethodsSection,
    #[serde(default)]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub benchmark: Option<BenchmarkSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Name used in reports and plots.
    pub name: String,
    /// JSONL corpus file; exactly one of `path` and `synthetic` must be set.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Built-in corpus generator; exactly one of `path` and `synthetic`
    /// must be set.
    #[serde(default)]
    pub synthetic: Option<SyntheticSection>,
    /// Drop documents with fewer tokens before anything else happens.
    #[serde(default)]
    pub min_tokens: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub authors: usize,
    pub docs_per_author: usize,
    /// One of `char`, `word`, `topic`.
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub dev_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MethodsSection {
    #[serde(default)]
    pub scap: Option<ScapSection>,
    #[serde(default)]
    pub imposters: Option<ImpostersConfig>,
    #[serde(default, rename = "ldah-s")]
    pub ldahs: Option<LdaConfig>,
    #[serde(default, rename = "svm-stems")]
    pub svm: Option<SvmConfig>,
    #[serde(default, rename = "cnn-word")]
    pub cnn_word: Option<CnnSection>,
    #[serde(default, rename = "cnn-char")]
    pub cnn_char: Option<CnnSection>,
    #[serde(default, rename = "cnn-word-word")]
    pub cnn_word_word: Option<CnnSection>,
    #[serde(default, rename = "cnn-word-char")]
    pub cnn_word_char: Option<CnnSection>,
    #[serde(default, rename = "cnn-word-word-char")]
    pub cnn_word_word_char: Option<CnnSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScapSection {
    pub ngram_size: usize,
    pub profile_size: usize,
}

/// Network hyperparameters; every omitted field keeps the variant default.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnnSection {
    pub embedding_dim: Option<usize>,
    pub filter_windows: Option<Vec<usize>>,
    pub maps_per_window: Option<usize>,
    pub dropout: Option<f64>,
    pub mask_pad_windows: Option<bool>,
    pub word_len_cap: Option<usize>,
    pub char_len_cap: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub max_norm: Option<f64>,
    pub adadelta_rho: Option<f64>,
    pub adadelta_eps: Option<f64>,
    pub seed: Option<u64>,
    /// Word vocabulary size fitted on the training split.
    pub vocab_size: Option<usize>,
    /// Character alphabet file (one symbol per line); defaults to the
    /// built-in 98-symbol alphabet.
    pub alphabet_path: Option<PathBuf>,
    /// Pre-trained word vectors in `word v1 v2 ...` text format.
    pub embeddings_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Which configured method `train` builds.
    pub method: String,
    /// Where the model container goes unless `--output` overrides it.
    #[serde(default)]
    pub model_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    /// Author counts of the scaling sweep, ascending.
    pub author_counts: Vec<usize>,
    /// Which configured methods run; defaults to all of them.
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub svg_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads and validates a configuration file, then applies the
    /// documented `ATRB_*` environment overrides.
    pub fn load(path: &Path) -> AppResult<ExperimentConfig> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
        let mut config: ExperimentConfig = toml::from_str(&raw)
            .map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
        config.apply_env()?;
        config.validate()?;
        Ok(config)
    }

    /// `ATRB_DATA` replaces the dataset path, `ATRB_SEED` the split seed.
    fn apply_env(&mut self) -> AppResult<()> {
        if let Ok(path) = std::env::var("ATRB_DATA") {
            self.dataset.path = Some(PathBuf::from(path));
            self.dataset.synthetic = None;
        }
        if let Ok(seed) = std::env::var("ATRB_SEED") {
            self.split.seed = seed
                .parse()
                .map_err(|_| AppError::Usage(format!("ATRB_SEED is not an integer: {seed:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> AppResult<()> {
        match (&self.dataset.path, &self.dataset.synthetic) {
            (Some(_), Some(_)) => {
                return Err(AppError::Usage(
                    "dataset has both `path` and `synthetic`; pick one".into(),
                ))
            }
            (None, None) => {
                return Err(AppError::Usage(
                    "dataset needs either `path` or `synthetic`".into(),
                ))
            }
            _ => {}
        }
        if let Some(s) = &self.dataset.synthetic {
            signature_mode(&s.mode)?;
        }
        let split = self.split_spec();
        split.validate().map_err(|e| AppError::Usage(e.to_string()))?;
        if let Some(train) = &self.train {
            self.methods.resolve(&train.method)?;
        }
        if let Some(bench) = &self.benchmark {
            if bench.author_counts.is_empty() {
                return Err(AppError::Usage("benchmark.author_counts is empty".into()));
            }
            if bench.author_counts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(AppError::Usage(
                    "benchmark.author_counts must be strictly ascending".into(),
                ));
            }
            for name in self.benchmark_method_names()? {
                self.methods.resolve(&name)?;
            }
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.split.test_fraction,
            dev_fraction: self.split.dev_fraction,
            seed: self.split.seed,
        }
    }

    /// Loads or generates the dataset and applies the minimum-token filter.
    pub fn load_corpus(&self) -> AppResult<Corpus> {
        let corpus = if let Some(path) = &self.dataset.path {
            Corpus::load_jsonl(path)?
        } else {
            let s = self.dataset.synthetic.as_ref().expect("validated");
            generate_synthetic(&SyntheticSpec {
                authors: s.authors,
                docs_per_author: s.docs_per_author,
                mode: signature_mode(&s.mode)?,
                seed: s.seed,
            })?
        };
        match self.dataset.min_tokens {
            Some(min) if min > 0 => Ok(corpus.filter_min_tokens(min)?),
            _ => Ok(corpus),
        }
    }

    /// The method list a benchmark runs: the explicit list, or every
    /// configured method in canonical order.
    pub fn benchmark_method_names(&self) -> AppResult<Vec<String>> {
        let bench = self
            .benchmark
            .as_ref()
            .ok_or_else(|| AppError::Usage("config has no [benchmark] section".into()))?;
        match &bench.methods {
            Some(list) => {
                if list.is_empty() {
                    return Err(AppError::Usage("benchmark.methods is empty".into()));
                }
                Ok(list.clone())
            }
            None => {
                let configured: Vec<String> = METHOD_ORDER
                    .iter()
                    .filter(|name| self.methods.section_present(name))
                    .map(|s| s.to_string())
                    .collect();
                if configured.is_empty() {
                    return Err(AppError::Usage("no [methods.*] sections configured".into()));
                }
                Ok(configured)
            }
        }
    }
}

pub fn signature_mode(name: &str) -> AppResult<SignatureMode> {
    match name {
        "char" => Ok(SignatureMode::Char),
        "word" => Ok(SignatureMode::Word),
        "topic" => Ok(SignatureMode::Topic),
        other => Err(AppError::Usage(format!(
            "unknown synthetic mode {other:?} (expected char, word, or topic)"
        ))),
    }
}

impl MethodsSection {
    fn section_present(&self, name: &str) -> bool {
        match name {
            "scap" => self.scap.is_some(),
            "imposters" => self.imposters.is_some(),
            "ldah-s" => self.ldahs.is_some(),
            "svm-stems" => self.svm.is_some(),
            "cnn-word" => self.cnn_word.is_some(),
            "cnn-char" => self.cnn_char.is_some(),
            "cnn-word-word" => self.cnn_word_word.is_some(),
            "cnn-word-char" => self.cnn_word_char.is_some(),
            "cnn-word-word-char" => self.cnn_word_word_char.is_some(),
            _ => false,
        }
    }

    /// Builds the full method specification for a configured method name.
    pub fn resolve(&self, name: &str) -> AppResult<MethodSpec> {
        let missing = || AppError::Usage(format!("config has no [methods.{name}] section"));
        match name {
            "scap" => {
                let s = self.scap.as_ref().ok_or_else(missing)?;
                Ok(MethodSpec::Scap { ngram_size: s.ngram_size, profile_size: s.profile_size })
            }
            "imposters" => Ok(MethodSpec::Imposters(self.imposters.ok_or_else(missing)?)),
            "ldah-s" => Ok(MethodSpec::Ldahs(self.ldahs.ok_or_else(missing)?)),
            "svm-stems" => Ok(MethodSpec::Svm(self.svm.clone().ok_or_else(missing)?)),
            _ => {
                let variant = Variant::parse(name)
                    .map_err(|_| AppError::Usage(format!("unknown method {name:?}")))?;
                let section = match name {
                    "cnn-word" => &self.cnn_word,
                    "cnn-char" => &self.cnn_char,
                    "cnn-word-word" => &self.cnn_word_word,
                    "cnn-word-char" => &self.cnn_word_char,
                    "cnn-word-word-char" => &self.cnn_word_word_char,
                    _ => unreachable!("Variant::parse accepted {name}"),
                };
                section.as_ref().ok_or_else(missing)?.resolve(variant)
            }
        }
    }
}

impl CnnSection {
    fn resolve(&self, variant: Variant) -> AppResult<MethodSpec> {
        let defaults = ModelConfig::for_variant(variant);
        let model = ModelConfig {
            variant,
            embedding_dim: self.embedding_dim.unwrap_or(defaults.embedding_dim),
            filter_windows: self.filter_windows.clone().unwrap_or(defaults.filter_windows),
            maps_per_window: self.maps_per_window.unwrap_or(defaults.maps_per_window),
            dropout: self.dropout.unwrap_or(defaults.dropout),
            mask_pad_windows: self.mask_pad_windows.unwrap_or(defaults.mask_pad_windows),
            word_len_cap: self.word_len_cap.unwrap_or(defaults.word_len_cap),
            char_len_cap: self.char_len_cap.unwrap_or(defaults.char_len_cap),
        };
        let train_defaults = TrainConfig::default();
        let train = TrainConfig {
            epochs: self.epochs.unwrap_or(train_defaults.epochs),
            batch_size: self.batch_size.unwrap_or(train_defaults.batch_size),
            dropout: model.dropout,
            max_norm: self.max_norm.or(train_defaults.max_norm),
            adadelta_rho: self.adadelta_rho.unwrap_or(train_defaults.adadelta_rho),
            adadelta_eps: self.adadelta_eps.unwrap_or(train_defaults.adadelta_eps),
            seed: self.seed.unwrap_or(train_defaults.seed),
            word_len_cap: model.word_len_cap,
            char_len_cap: model.char_len_cap,
        };
        model.validate().map_err(|e| AppError::Usage(e.to_string()))?;
        train.validate().map_err(|e| AppError::Usage(e.to_string()))?;
        let alphabet = match &self.alphabet_path {
            Some(path) => load_alphabet(path)?,
            None => Alphabet::default_98(),
        };
        Ok(MethodSpec::Cnn {
            model,
            train,
            vocab_size: self.vocab_size.unwrap_or(30_000),
            alphabet,
            embeddings_path: self.embeddings_path.clone(),
        })
    }
}

/// Reads an alphabet file: one symbol per line, `#`-directives for the
/// unprintables, blank lines ignored.
pub fn load_alphabet(path: &Path) -> AppResult<Alphabet> {
    Alphabet::from_file(path).map_err(AppError::from)
}
