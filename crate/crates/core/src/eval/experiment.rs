//! Benchmark orchestration: train each configured method at each author
//! count on identical splits and collect one [`RunReport`] per cell.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::classical::{ImpostersConfig, ImpostersModel, LdaConfig, LdahsModel, ScapModel, SvmConfig, SvmModel};
use crate::corpus::{Corpus, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{macro_f1, micro_f1, RunReport};
use crate::features::{Alphabet, Tokenizer, Vocabulary, WordEmbeddings};
use crate::nnet::{build_variant, train as train_cnn, ConvModel, ModelConfig, TrainConfig};
use crate::Prediction;

/// A method to benchmark, with everything needed to train it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "method")]
pub enum MethodSpec {
    #[serde(rename = "scap")]
    Scap {
        ngram_size: usize,
        profile_size: usize,
    },
    #[serde(rename = "imposters")]
    Imposters(ImpostersConfig),
    #[serde(rename = "ldah-s")]
    Ldahs(LdaConfig),
    #[serde(rename = "svm-stems")]
    Svm(SvmConfig),
    #[serde(rename = "cnn")]
    Cnn {
        model: ModelConfig,
        train: TrainConfig,
        vocab_size: usize,
        alphabet: Alphabet,
        embeddings_path: Option<PathBuf>,
    },
}

impl MethodSpec {
    /// The name used in reports and plots.
    pub fn name(&self) -> String {
        match self {
            MethodSpec::Scap { .. } => "scap".into(),
            MethodSpec::Imposters(_) => "imposters".into(),
            MethodSpec::Ldahs(_) => "ldah-s".into(),
            MethodSpec::Svm(_) => "svm-stems".into(),
            MethodSpec::Cnn { model, .. } => model.variant.name().into(),
        }
    }

    /// A structured snapshot of the full configuration, embedded in every
    /// [`RunReport`]. Parsing the snapshot back yields an equal spec.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("method specs serialize")
    }
}

/// A trained method behind one prediction interface.
pub enum TrainedMethod {
    Scap(ScapModel),
    Imposters(ImpostersModel),
    Ldahs(LdahsModel),
    Svm(SvmModel),
    Cnn(Box<ConvModel>),
}

impl TrainedMethod {
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        match self {
            TrainedMethod::Scap(m) => m.predict(text),
            TrainedMethod::Imposters(m) => m.predict(text),
            TrainedMethod::Ldahs(m) => m.predict(text),
            TrainedMethod::Svm(m) => m.predict(text),
            TrainedMethod::Cnn(m) => m.predict(text),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        match self {
            TrainedMethod::Scap(m) => m.save(path),
            TrainedMethod::Imposters(m) => m.save(path),
            TrainedMethod::Ldahs(m) => m.save(path),
            TrainedMethod::Svm(m) => m.save(path),
            TrainedMethod::Cnn(m) => m.save(path),
        }
    }

    /// Opens any saved model, dispatching on the container's model kind.
    pub fn load(path: impl AsRef<Path>) -> Result<TrainedMethod> {
        let path = path.as_ref();
        let kind = crate::container::Container::read(path)?
            .model_kind()?
            .to_string();
        match kind.as_str() {
            "scap" => Ok(TrainedMethod::Scap(ScapModel::load(path)?)),
            "imposters" => Ok(TrainedMethod::Imposters(ImpostersModel::load(path)?)),
            "ldah-s" => Ok(TrainedMethod::Ldahs(LdahsModel::load(path)?)),
            "svm-stems" => Ok(TrainedMethod::Svm(SvmModel::load(path)?)),
            "cnn" => Ok(TrainedMethod::Cnn(Box::new(ConvModel::load(path)?))),
            other => Err(Error::Container(format!("unknown model kind {other:?}"))),
        }
    }
}

fn fit_cnn_vocab(train: &Corpus, vocab_size: usize) -> Result<Vocabulary> {
    let tokenizer = Tokenizer::default();
    let token_lists: Vec<Vec<String>> =
        train.documents().iter().map(|d| tokenizer.tokenize(&d.text)).collect();
    Vocabulary::fit(token_lists.iter().map(|t| t.as_slice()), vocab_size)
}

/// Trains one method on `train` (the convolutional variants also use `dev`
/// for snapshot selection). Returns the model and the wall-clock seconds
/// spent inside the core training call — feature preparation (vocabulary
/// fitting, embedding loading) is excluded from the clock.
pub fn train_method(
    spec: &MethodSpec,
    train: &Corpus,
    dev: &Corpus,
) -> Result<(TrainedMethod, f64)> {
    match spec {
        MethodSpec::Scap { ngram_size, profile_size } => {
            let t0 = Instant::now();
            let model = ScapModel::train(train, *ngram_size, *profile_size)?;
            Ok((TrainedMethod::Scap(model), t0.elapsed().as_secs_f64()))
        }
        MethodSpec::Imposters(config) => {
            let t0 = Instant::now();
            let model = ImpostersModel::train(train, config)?;
            Ok((TrainedMethod::Imposters(model), t0.elapsed().as_secs_f64()))
        }
        MethodSpec::Ldahs(config) => {
            let t0 = Instant::now();
            let model = LdahsModel::train(train, config)?;
            Ok((TrainedMethod::Ldahs(model), t0.elapsed().as_secs_f64()))
        }
        MethodSpec::Svm(config) => {
            let t0 = Instant::now();
            let model = SvmModel::train(train, config)?;
            Ok((TrainedMethod::Svm(model), t0.elapsed().as_secs_f64()))
        }
        MethodSpec::Cnn { model, train: train_config, vocab_size, alphabet, embeddings_path } => {
            let vocab = if model.variant.uses_words() {
                Some(fit_cnn_vocab(train, *vocab_size)?)
            } else {
                None
            };
            let pretrained = match embeddings_path {
                Some(p) => Some(WordEmbeddings::load(p)?),
                None => None,
            };
            let authors: Vec<String> = train.authors().map(str::to_string).collect();
            let init = build_variant(
                model,
                vocab,
                alphabet.clone(),
                pretrained.as_ref(),
                &authors,
                train_config.seed,
            )?;
            let t0 = Instant::now();
            let (trained, history) = train_cnn(init, train, dev, train_config)?;
            let elapsed = t0.elapsed().as_secs_f64();
            log::info!(
                "{}: best epoch {} of {}",
                model.variant.name(),
                history.best_epoch,
                history.epochs.len()
            );
            Ok((TrainedMethod::Cnn(Box::new(trained)), elapsed))
        }
    }
}

/// Runs the full grid: for each author count the corpus is narrowed to its
/// top authors and split once, so every method in that cell trains and
/// tests on identical documents. A method that fails to train yields a
/// report with `failed = true` and NaN scores; the run carries on.
pub fn run_experiment(
    methods: &[MethodSpec],
    corpus: &Corpus,
    dataset: &str,
    author_counts: &[usize],
    split: &SplitSpec,
) -> Result<Vec<RunReport>> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods configured".into()));
    }
    if author_counts.is_empty() {
        return Err(Error::InvalidParameter("no author counts configured".into()));
    }
    split.validate()?;
    let mut reports = Vec::with_capacity(methods.len() * author_counts.len());
    for &n in author_counts {
        let sub = corpus.top_n_authors(n)?;
        let (train_c, dev_c, test_c) = sub.stratified_split(split)?;
        if test_c.is_empty() {
            return Err(Error::SplitInfeasible { offenders: vec![format!("{n}-author test split is empty")] });
        }
        log::info!(
            "{dataset}/{n} authors: {} train, {} dev, {} test documents",
            train_c.len(),
            dev_c.len(),
            test_c.len()
        );
        for spec in methods {
            let method = spec.name();
            let report = match train_method(spec, &train_c, &dev_c) {
                Ok((model, train_s)) => {
                    let mut gold = Vec::with_capacity(test_c.len());
                    let mut pred = Vec::with_capacity(test_c.len());
                    let mut predict_time = 0.0f64;
                    for doc in test_c.documents() {
                        let t0 = Instant::now();
                        let outcome = model.predict(&doc.text);
                        predict_time += t0.elapsed().as_secs_f64();
                        gold.push(doc.author_id.clone());
                        match outcome {
                            Ok(p) => pred.push(p.author),
                            Err(e) => {
                                log::warn!("{method}: prediction failed, counted wrong: {e}");
                                pred.push(String::new());
                            }
                        }
                    }
                    RunReport {
                        method: method.clone(),
                        dataset: dataset.to_string(),
                        authors: n,
                        micro_f1: micro_f1(&gold, &pred)?,
                        macro_f1: macro_f1(&gold, &pred)?,
                        train_s,
                        predict_ms: predict_time * 1000.0,
                        seed: split.seed,
                        failed: false,
                        error: None,
                        config: spec.snapshot(),
                    }
                }
                Err(e) => {
                    log::warn!("{method} failed to train on {dataset}/{n} authors: {e}");
                    RunReport {
                        method: method.clone(),
                        dataset: dataset.to_string(),
                        authors: n,
                        micro_f1: f64::NAN,
                        macro_f1: f64::NAN,
                        train_s: 0.0,
                        predict_ms: 0.0,
                        seed: split.seed,
                        failed: true,
                        error: Some(e.to_string()),
                        config: spec.snapshot(),
                    }
                }
            };
            reports.push(report);
        }
    }
    Ok(reports)
}
