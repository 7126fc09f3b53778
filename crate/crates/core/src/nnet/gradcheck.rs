//! Numerical gradient verification.
//!
//! Every analytic gradient the backward pass produces is compared against a
//! central finite difference of the loss: perturb one parameter by ±ε,
//! re-run the forward pass, and require
//! `|analytic - numeric| / max(|analytic|, |numeric|, 1e-5) <= tolerance`.
//! The relative-error floor keeps near-zero gradient pairs from blowing up
//! the ratio. Dropout is disabled throughout so the loss is deterministic.
//!
//! [`run_suite`] builds a spread of tiny random models covering all five
//! channel layouts and checks every trainable parameter of each: filter
//! weights and biases, softmax weights and biases, and each non-static
//! embedding row that the input can actually reach (PAD rows excluded —
//! they are skipped by construction and receive no gradient).

use crate::error::Result;
use crate::features::{Alphabet, TextEncoding, Vocabulary};
use crate::nnet::model::{build_variant, ConvModel, Gradients, ModelConfig, Variant};
use crate::nnet::ops::cross_entropy;
use crate::rng::XorShift64;

/// Largest acceptable relative error between analytic and numeric
/// gradients.
pub const TOLERANCE: f64 = 1e-4;

const EPSILON: f64 = 1e-5;

/// Outcome of checking one model.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub variant: Variant,
    pub parameters_checked: usize,
    pub max_rel_err: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= TOLERANCE
    }
}

/// Outcome of a whole suite.
#[derive(Debug, Clone)]
pub struct GradSuiteReport {
    pub models: Vec<GradCheckReport>,
    pub parameters_checked: usize,
    pub max_rel_err: f64,
}

impl GradSuiteReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= TOLERANCE
    }
}

fn loss(model: &ConvModel, enc: &TextEncoding, gold: usize) -> Result<f64> {
    let pass = model.forward(enc, None)?;
    Ok(cross_entropy(&pass.probs, gold))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-5)
}

/// Checks every trainable parameter of `model` on one example. The model is
/// restored exactly after every perturbation.
pub fn check_model(
    model: &mut ConvModel,
    enc: &TextEncoding,
    gold: usize,
) -> Result<GradCheckReport> {
    let pass = model.forward(enc, None)?;
    let mut grads = Gradients::zeros_like(model);
    model.backward(enc, &pass, gold, &mut grads)?;

    let mut checked = 0usize;
    let mut max_err = 0.0f64;
    let mut probe = |model: &mut ConvModel, loc: ParamRef, analytic: f64| -> Result<()> {
        let original = read_param(model, loc);
        write_param(model, loc, original + EPSILON);
        let up = loss(model, enc, gold)?;
        write_param(model, loc, original - EPSILON);
        let down = loss(model, enc, gold)?;
        write_param(model, loc, original);
        let numeric = (up - down) / (2.0 * EPSILON);
        max_err = max_err.max(rel_err(analytic, numeric));
        checked += 1;
        Ok(())
    };

    for fi in 0..model.filters.len() {
        let (h, k) = (model.filters[fi].window, model.filters[fi].weights.cols());
        for j in 0..h {
            for c in 0..k {
                let analytic = grads.filter_w[fi].get(j, c);
                probe(model, ParamRef::FilterW(fi, j, c), analytic)?;
            }
        }
        probe(model, ParamRef::FilterB(fi), grads.filter_b[fi])?;
    }
    for f in 0..model.softmax_w.rows() {
        for a in 0..model.softmax_w.cols() {
            probe(model, ParamRef::SoftmaxW(f, a), grads.softmax_w.get(f, a))?;
        }
    }
    for a in 0..model.softmax_b.len() {
        probe(model, ParamRef::SoftmaxB(a), grads.softmax_b[a])?;
    }
    for ci in 0..model.channels.len() {
        if model.channels[ci].is_static {
            continue;
        }
        let mut rows: Vec<usize> = match model.channels[ci].kind {
            crate::nnet::model::ChannelKind::Word => enc.word_ids.clone(),
            _ => enc.char_ids.clone(),
        };
        rows.sort_unstable();
        rows.dedup();
        let cols = model.channels[ci].matrix.cols();
        for row in rows {
            if row == 0 {
                continue;
            }
            for c in 0..cols {
                let analytic =
                    grads.channels[ci].as_ref().map(|g| g.get(row, c)).unwrap_or(0.0);
                probe(model, ParamRef::Channel(ci, row, c), analytic)?;
            }
        }
    }

    Ok(GradCheckReport { variant: model.variant, parameters_checked: checked, max_rel_err: max_err })
}

#[derive(Clone, Copy)]
enum ParamRef {
    FilterW(usize, usize, usize),
    FilterB(usize),
    SoftmaxW(usize, usize),
    SoftmaxB(usize),
    Channel(usize, usize, usize),
}

fn read_param(model: &ConvModel, loc: ParamRef) -> f64 {
    match loc {
        ParamRef::FilterW(f, j, c) => model.filters[f].weights.get(j, c),
        ParamRef::FilterB(f) => model.filters[f].bias,
        ParamRef::SoftmaxW(f, a) => model.softmax_w.get(f, a),
        ParamRef::SoftmaxB(a) => model.softmax_b[a],
        ParamRef::Channel(ci, r, c) => model.channels[ci].matrix.get(r, c),
    }
}

fn write_param(model: &mut ConvModel, loc: ParamRef, value: f64) {
    match loc {
        ParamRef::FilterW(f, j, c) => model.filters[f].weights.set(j, c, value),
        ParamRef::FilterB(f) => model.filters[f].bias = value,
        ParamRef::SoftmaxW(f, a) => model.softmax_w.set(f, a, value),
        ParamRef::SoftmaxB(a) => model.softmax_b[a] = value,
        ParamRef::Channel(ci, r, c) => model.channels[ci].matrix.set(r, c, value),
    }
}

fn random_alphabet(rng: &mut XorShift64) -> Alphabet {
    let letters = 5 + rng.below(5);
    let mut lines: Vec<String> = (0..letters)
        .map(|i| char::from(b'a' + i as u8).to_string())
        .collect();
    lines.push("#DIGIT".into());
    Alphabet::from_lines(&lines).unwrap()
}

fn random_vocab(rng: &mut XorShift64) -> Vocabulary {
    let n = 8 + rng.below(8);
    let entries = (0..n).map(|i| format!("w{i}")).collect();
    Vocabulary::from_entries(entries, n)
}

fn random_text(vocab: &Vocabulary, alphabet: &Alphabet, rng: &mut XorShift64) -> String {
    let words = 3 + rng.below(8);
    let mut parts = Vec::with_capacity(words);
    for _ in 0..words {
        // Mix in-vocabulary words, raw character strings and unknowns.
        match rng.below(4) {
            0..=1 => {
                let i = rng.below(vocab.len());
                parts.push(vocab.word(i).to_string());
            }
            2 => {
                let len = 1 + rng.below(4);
                let s: String = (0..len)
                    .map(|_| {
                        let visible = alphabet.visible_size();
                        char::from(b'a' + rng.below(visible.min(26)) as u8)
                    })
                    .collect();
                parts.push(s);
            }
            _ => parts.push(format!("unk{}", rng.below(100))),
        }
    }
    parts.join(" ")
}

/// Builds `count` tiny random models cycling through the five variants and
/// gradient-checks each on one random example.
pub fn run_suite(count: usize, seed: u64) -> Result<GradSuiteReport> {
    let mut rng = XorShift64::new(seed);
    let mut models = Vec::with_capacity(count);
    for i in 0..count {
        let variant = Variant::ALL[i % Variant::ALL.len()];
        let alphabet = random_alphabet(&mut rng);
        let vocab = random_vocab(&mut rng);
        let dim = 3 + rng.below(3);
        let cap = 10 + rng.below(6);
        let config = ModelConfig {
            variant,
            embedding_dim: dim,
            filter_windows: vec![2, 3],
            maps_per_window: 2,
            dropout: 0.0,
            mask_pad_windows: rng.below(2) == 0,
            word_len_cap: cap,
            char_len_cap: cap,
        };
        let n_authors = 2 + rng.below(3);
        let authors: Vec<String> = (0..n_authors).map(|a| format!("author-{a}")).collect();
        let model_seed = rng.next_u64();
        let mut model = build_variant(
            &config,
            variant.uses_words().then(|| vocab.clone()),
            alphabet.clone(),
            None,
            &authors,
            model_seed,
        )?;
        let text = random_text(&vocab, &alphabet, &mut rng);
        let gold = rng.below(n_authors);
        let enc = model.encode(&text);
        models.push(check_model(&mut model, &enc, gold)?);
    }
    let parameters_checked = models.iter().map(|m| m.parameters_checked).sum();
    let max_rel_err = models.iter().map(|m| m.max_rel_err).fold(0.0, f64::max);
    Ok(GradSuiteReport { models, parameters_checked, max_rel_err })
}
