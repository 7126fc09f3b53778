//! Minibatch training with Adadelta, inverted dropout and dev-set model
//! selection.
//!
//! Each epoch shuffles the training documents, walks them in minibatches,
//! averages the gradients of `-ln p_gold` over each batch and applies one
//! Adadelta step per batch. After every epoch the model is scored on the
//! dev split (accuracy, which for single-label prediction equals
//! micro-averaged F1) and the best-scoring snapshot is what training
//! returns — a strictly better score is required to replace the incumbent,
//! so ties keep the earlier epoch.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::TextEncoding;
use crate::nnet::adadelta::adadelta_step;
use crate::nnet::model::{ConvModel, Gradients};
use crate::nnet::ops::cross_entropy;
use crate::rng::{derive_seed, XorShift64};

const SHUFFLE_STREAM: u64 = 0x5487;
const DROPOUT_STREAM: u64 = 0xD407;

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    /// Per-class L2 cap on the softmax weight columns; `None` disables it.
    pub max_norm: Option<f64>,
    pub adadelta_rho: f64,
    pub adadelta_eps: f64,
    pub seed: u64,
    pub word_len_cap: usize,
    pub char_len_cap: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 50,
            dropout: 0.5,
            max_norm: None,
            adadelta_rho: 0.95,
            adadelta_eps: 1e-6,
            seed: 0,
            word_len_cap: 500,
            char_len_cap: 3000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if let Some(c) = self.max_norm {
            if !(c > 0.0) {
                return Err(Error::InvalidParameter("max_norm must be positive".into()));
            }
        }
        if !(0.0..1.0).contains(&self.adadelta_rho) {
            return Err(Error::InvalidParameter("adadelta_rho must be in [0, 1)".into()));
        }
        if !(self.adadelta_eps > 0.0) {
            return Err(Error::InvalidParameter("adadelta_eps must be positive".into()));
        }
        if self.word_len_cap == 0 || self.char_len_cap == 0 {
            return Err(Error::InvalidParameter("length caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub mean_loss: f64,
    pub dev_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Index into `epochs` of the returned snapshot; 0 with no epochs run.
    pub best_epoch: usize,
}

/// Per-tensor Adadelta accumulators mirroring [`Gradients`].
struct AdadeltaState {
    channels: Vec<Option<(Vec<f64>, Vec<f64>)>>,
    filter_w: Vec<(Vec<f64>, Vec<f64>)>,
    filter_b: (Vec<f64>, Vec<f64>),
    softmax_w: (Vec<f64>, Vec<f64>),
    softmax_b: (Vec<f64>, Vec<f64>),
    rho: f64,
    eps: f64,
}

impl AdadeltaState {
    fn new(model: &ConvModel, rho: f64, eps: f64) -> AdadeltaState {
        let pair = |n: usize| (vec![0.0; n], vec![0.0; n]);
        AdadeltaState {
            channels: model
                .channels
                .iter()
                .map(|c| (!c.is_static).then(|| pair(c.matrix.rows() * c.matrix.cols())))
                .collect(),
            filter_w: model.filters.iter().map(|f| pair(f.window * f.weights.cols())).collect(),
            filter_b: pair(model.filters.len()),
            softmax_w: pair(model.softmax_w.rows() * model.softmax_w.cols()),
            softmax_b: pair(model.softmax_b.len()),
            rho,
            eps,
        }
    }

    fn step(&mut self, model: &mut ConvModel, grads: &Gradients) {
        for (ci, slot) in self.channels.iter_mut().enumerate() {
            if let Some((eg, ed)) = slot {
                let g = grads.channels[ci].as_ref().expect("gradient for non-static channel");
                adadelta_step(
                    model.channels[ci].matrix.data_mut(),
                    g.data(),
                    eg,
                    ed,
                    self.rho,
                    self.eps,
                );
            }
        }
        for (fi, (eg, ed)) in self.filter_w.iter_mut().enumerate() {
            adadelta_step(
                model.filters[fi].weights.data_mut(),
                grads.filter_w[fi].data(),
                eg,
                ed,
                self.rho,
                self.eps,
            );
        }
        let mut biases: Vec<f64> = model.filters.iter().map(|f| f.bias).collect();
        adadelta_step(
            &mut biases,
            &grads.filter_b,
            &mut self.filter_b.0,
            &mut self.filter_b.1,
            self.rho,
            self.eps,
        );
        for (f, b) in model.filters.iter_mut().zip(biases) {
            f.bias = b;
        }
        adadelta_step(
            model.softmax_w.data_mut(),
            grads.softmax_w.data(),
            &mut self.softmax_w.0,
            &mut self.softmax_w.1,
            self.rho,
            self.eps,
        );
        adadelta_step(
            &mut model.softmax_b,
            &grads.softmax_b,
            &mut self.softmax_b.0,
            &mut self.softmax_b.1,
            self.rho,
            self.eps,
        );
    }
}

/// Rescales any softmax weight column whose L2 norm exceeds `cap` back onto
/// the cap sphere.
fn clip_softmax_columns(model: &mut ConvModel, cap: f64) {
    let rows = model.softmax_w.rows();
    let cols = model.softmax_w.cols();
    for a in 0..cols {
        let mut norm_sq = 0.0;
        for f in 0..rows {
            let w = model.softmax_w.get(f, a);
            norm_sq += w * w;
        }
        let norm = norm_sq.sqrt();
        if norm > cap {
            let scale = cap / norm;
            for f in 0..rows {
                let w = model.softmax_w.get(f, a);
                model.softmax_w.set(f, a, w * scale);
            }
        }
    }
}

fn dev_accuracy(model: &ConvModel, encodings: &[TextEncoding], labels: &[usize]) -> Result<f64> {
    let mut correct = 0usize;
    for (enc, &gold) in encodings.iter().zip(labels) {
        let pass = model.forward(enc, None)?;
        let mut best = 0;
        for (a, &p) in pass.probs.iter().enumerate() {
            if p > pass.probs[best] {
                best = a;
            }
        }
        if best == gold {
            correct += 1;
        }
    }
    Ok(correct as f64 / encodings.len() as f64)
}

fn encode_corpus(model: &ConvModel, corpus: &Corpus) -> Result<(Vec<TextEncoding>, Vec<usize>)> {
    let mut encodings = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let gold = model
            .authors
            .binary_search(&doc.author_id)
            .map_err(|_| {
                Error::InvalidParameter(format!(
                    "document author {:?} is not a model class",
                    doc.author_id
                ))
            })?;
        encodings.push(model.encode(&doc.text));
        labels.push(gold);
    }
    Ok((encodings, labels))
}

/// Trains `model` on `train`, selecting the post-epoch snapshot with the
/// best dev accuracy. The model's length caps and dropout rate are taken
/// from `config`. With `epochs == 0` the initialization is returned
/// unchanged (history empty, `best_epoch == 0`).
pub fn train(
    mut model: ConvModel,
    train: &Corpus,
    dev: &Corpus,
    config: &TrainConfig,
) -> Result<(ConvModel, TrainHistory)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyCorpus("training split is empty".into()));
    }
    if dev.is_empty() {
        return Err(Error::EmptyCorpus("dev split is empty".into()));
    }
    if model.variant.is_hybrid() && config.word_len_cap != config.char_len_cap {
        return Err(Error::InvalidParameter(format!(
            "hybrid variants need equal word and char caps, got {} and {}",
            config.word_len_cap, config.char_len_cap
        )));
    }
    model.word_len_cap = config.word_len_cap;
    model.char_len_cap = config.char_len_cap;
    model.dropout = config.dropout;

    let (train_enc, train_labels) = encode_corpus(&model, train)?;
    let (dev_enc, dev_labels) = encode_corpus(&model, dev)?;

    let mut shuffle_rng = XorShift64::new(derive_seed(config.seed, SHUFFLE_STREAM));
    let mut dropout_rng = XorShift64::new(derive_seed(config.seed, DROPOUT_STREAM));
    let mut grads = Gradients::zeros_like(&model);
    let mut optimizer = AdadeltaState::new(&model, config.adadelta_rho, config.adadelta_eps);

    let mut history = TrainHistory { epochs: Vec::with_capacity(config.epochs), best_epoch: 0 };
    let mut best: Option<(ConvModel, f64)> = None;
    let mut order: Vec<usize> = (0..train_enc.len()).collect();

    for epoch in 0..config.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            grads.zero();
            let mut batch_loss = 0.0;
            for &doc in batch {
                let pass = model.forward(&train_enc[doc], Some(&mut dropout_rng))?;
                batch_loss += cross_entropy(&pass.probs, train_labels[doc]);
                model.backward(&train_enc[doc], &pass, train_labels[doc], &mut grads)?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_idx });
            }
            loss_sum += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            optimizer.step(&mut model, &grads);
            if let Some(cap) = config.max_norm {
                clip_softmax_columns(&mut model, cap);
            }
        }
        let dev_f1 = dev_accuracy(&model, &dev_enc, &dev_labels)?;
        let mean_loss = loss_sum / train_enc.len() as f64;
        log::debug!("epoch {epoch}: mean loss {mean_loss:.4}, dev micro-F1 {dev_f1:.4}");
        history.epochs.push(EpochRecord { mean_loss, dev_f1 });
        if best.as_ref().map_or(true, |(_, f1)| dev_f1 > *f1) {
            best = Some((model.clone(), dev_f1));
            history.best_epoch = epoch;
        }
    }

    let final_model = best.map(|(m, _)| m).unwrap_or(model);
    Ok((final_model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SignatureMode, SyntheticSpec};
    use crate::features::{Alphabet, Tokenizer, Vocabulary};
    use crate::nnet::model::{build_variant, ModelConfig, Variant};

    fn word_corpus(docs_per_author: usize, seed: u64) -> Corpus {
        generate_synthetic(&SyntheticSpec {
            authors: 3,
            docs_per_author,
            mode: SignatureMode::Word,
            seed,
        })
        .unwrap()
    }

    fn fit_vocab(corpus: &Corpus) -> Vocabulary {
        let tokenizer = Tokenizer::default();
        let token_lists: Vec<Vec<String>> =
            corpus.documents().iter().map(|d| tokenizer.tokenize(&d.text)).collect();
        Vocabulary::fit(token_lists.iter().map(|t| t.as_slice()), 500).unwrap()
    }

    fn small_word_model(corpus: &Corpus, seed: u64) -> ConvModel {
        let config = ModelConfig {
            variant: Variant::Word,
            embedding_dim: 8,
            filter_windows: vec![2, 3],
            maps_per_window: 4,
            dropout: 0.3,
            mask_pad_windows: true,
            word_len_cap: 80,
            char_len_cap: 1,
        };
        build_variant(
            &config,
            Some(fit_vocab(corpus)),
            Alphabet::default_98(),
            None,
            &corpus.authors().map(str::to_string).collect::<Vec<_>>(),
            seed,
        )
        .unwrap()
    }

    fn quick_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 10,
            dropout: 0.3,
            word_len_cap: 80,
            char_len_cap: 3000,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_the_initialization() {
        let corpus = word_corpus(6, 11);
        let model = small_word_model(&corpus, 3);
        let expected = {
            let mut m = model.clone();
            m.word_len_cap = 80;
            m.char_len_cap = 3000;
            m.dropout = 0.3;
            m
        };
        let (trained, history) = train(model, &corpus, &corpus, &quick_config(0)).unwrap();
        assert_eq!(trained, expected);
        assert!(history.epochs.is_empty());
        assert_eq!(history.best_epoch, 0);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let corpus = word_corpus(6, 12);
        let (a, ha) =
            train(small_word_model(&corpus, 5), &corpus, &corpus, &quick_config(3)).unwrap();
        let (b, hb) =
            train(small_word_model(&corpus, 5), &corpus, &corpus, &quick_config(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn loss_decreases_on_a_separable_corpus() {
        let corpus = word_corpus(8, 13);
        let config = TrainConfig { dropout: 0.0, ..quick_config(8) };
        let (_, history) = train(small_word_model(&corpus, 5), &corpus, &corpus, &config).unwrap();
        let first = history.epochs.first().unwrap().mean_loss;
        let last = history.epochs.last().unwrap().mean_loss;
        assert!(last < first, "loss went {first:.4} -> {last:.4}");
    }

    #[test]
    fn pad_embedding_rows_stay_zero_through_training() {
        let corpus = word_corpus(6, 14);
        let (trained, _) =
            train(small_word_model(&corpus, 5), &corpus, &corpus, &quick_config(3)).unwrap();
        for ch in &trained.channels {
            assert!(ch.matrix.row(0).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn returned_snapshot_matches_best_epoch() {
        let corpus = word_corpus(8, 15);
        let dev = word_corpus(3, 99);
        let (trained, history) =
            train(small_word_model(&corpus, 5), &corpus, &dev, &quick_config(5)).unwrap();
        let best = history.epochs[history.best_epoch].dev_f1;
        for (i, e) in history.epochs.iter().enumerate() {
            if i < history.best_epoch {
                assert!(e.dev_f1 < best, "earlier epoch {i} ties or beats the snapshot");
            } else {
                assert!(e.dev_f1 <= best);
            }
        }
        // The returned model reproduces the recorded best dev score.
        let (enc, labels) = encode_corpus(&trained, &dev).unwrap();
        let again = dev_accuracy(&trained, &enc, &labels).unwrap();
        assert!((again - best).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { dropout: 1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { dropout: -0.1, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { max_norm: Some(0.0), ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { adadelta_eps: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { word_len_cap: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn hybrid_cap_mismatch_is_rejected() {
        let corpus = word_corpus(4, 16);
        let config = ModelConfig {
            variant: Variant::WordChar,
            embedding_dim: 6,
            filter_windows: vec![2],
            maps_per_window: 2,
            dropout: 0.0,
            mask_pad_windows: true,
            word_len_cap: 64,
            char_len_cap: 64,
        };
        let model = build_variant(
            &config,
            Some(fit_vocab(&corpus)),
            Alphabet::default_98(),
            None,
            &corpus.authors().map(str::to_string).collect::<Vec<_>>(),
            1,
        )
        .unwrap();
        let bad = TrainConfig { word_len_cap: 64, char_len_cap: 128, ..quick_config(1) };
        assert!(matches!(
            train(model, &corpus, &corpus, &bad),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unknown_dev_author_is_rejected() {
        let corpus = word_corpus(4, 17);
        let stranger = word_corpus(4, 18);
        let mut docs = stranger.documents().to_vec();
        for d in &mut docs {
            d.author_id = format!("x-{}", d.author_id);
        }
        let strange = Corpus::from_documents(docs);
        let model = small_word_model(&corpus, 2);
        assert!(train(model, &corpus, &strange, &quick_config(1)).is_err());
    }

    #[test]
    fn max_norm_caps_softmax_columns() {
        let corpus = word_corpus(6, 19);
        let cap = 0.05;
        let config = TrainConfig { max_norm: Some(cap), ..quick_config(3) };
        let (trained, _) = train(small_word_model(&corpus, 5), &corpus, &corpus, &config).unwrap();
        for a in 0..trained.authors.len() {
            let mut norm_sq = 0.0;
            for f in 0..trained.filters.len() {
                let w = trained.softmax_w.get(f, a);
                norm_sq += w * w;
            }
            assert!(norm_sq.sqrt() <= cap + 1e-12);
        }
    }
}
