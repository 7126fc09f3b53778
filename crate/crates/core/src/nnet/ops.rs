//! Primitive network operations: narrow convolution with ReLU,
//! max-over-time pooling, stabilized softmax and cross-entropy.

use crate::error::{Error, Result};
use crate::nnet::tensor::Tensor;

/// One convolution filter: a `window × k` weight matrix with a single bias.
/// The activation is always ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilter {
    pub window: usize,
    pub weights: Tensor,
    pub bias: f64,
}

impl ConvFilter {
    pub fn new(weights: Tensor, bias: f64) -> ConvFilter {
        assert!(weights.rows() >= 1, "filter window must be at least 1");
        ConvFilter { window: weights.rows(), weights, bias }
    }
}

/// Result of convolving one filter over an input: exactly `n - h + 1`
/// values for input length `n` and window `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Narrow convolution over one or more channels sharing a filter: at every
/// window position the per-channel responses are summed, the single bias is
/// added, and ReLU applied. All channels must share the same `n × k` shape
/// and `n >= window` must hold.
pub fn conv_forward(inputs: &[&Tensor], filter: &ConvFilter) -> Result<FeatureMap> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::InvalidParameter("convolution needs at least one channel".into()))?;
    let n = first.rows();
    let k = first.cols();
    for input in inputs {
        if input.rows() != n || input.cols() != k {
            return Err(Error::EncodingMismatch(format!(
                "channel shapes differ: {}×{} vs {n}×{k}",
                input.rows(),
                input.cols()
            )));
        }
    }
    let h = filter.window;
    if filter.weights.cols() != k {
        return Err(Error::LengthMismatch { left: filter.weights.cols(), right: k });
    }
    if h > n {
        return Err(Error::WindowTooLarge { n, h });
    }
    let mut values = Vec::with_capacity(n - h + 1);
    for i in 0..=n - h {
        let mut acc = 0.0;
        for input in inputs {
            for j in 0..h {
                let row = input.row(i + j);
                let w = filter.weights.row(j);
                acc += dot(w, row);
            }
        }
        values.push(relu(acc + filter.bias));
    }
    Ok(FeatureMap { values })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum of a feature map and its position; ties go to the first maximum.
pub fn max_over_time(map: &[f64]) -> Result<(f64, usize)> {
    if map.is_empty() {
        return Err(Error::EmptyFeatureMap);
    }
    let mut best = map[0];
    let mut at = 0;
    for (i, &v) in map.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            at = i;
        }
    }
    Ok((best, at))
}

/// Numerically stabilized softmax (the maximum logit is subtracted before
/// exponentiation). The input must be non-empty.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "softmax over zero classes");
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Linear layer followed by softmax: `weights` is features × classes,
/// `bias` one value per class.
pub fn softmax_forward(features: &[f64], weights: &Tensor, bias: &[f64]) -> Result<Vec<f64>> {
    if weights.rows() != features.len() {
        return Err(Error::LengthMismatch { left: weights.rows(), right: features.len() });
    }
    if weights.cols() != bias.len() {
        return Err(Error::LengthMismatch { left: weights.cols(), right: bias.len() });
    }
    let mut logits = bias.to_vec();
    for (f, &x) in features.iter().enumerate() {
        for (logit, &w) in logits.iter_mut().zip(weights.row(f)) {
            *logit += x * w;
        }
    }
    Ok(softmax(&logits))
}

/// `-ln(p_gold)`, clamped away from zero probability so the loss stays
/// finite.
pub fn cross_entropy(probs: &[f64], gold: usize) -> f64 {
    -probs[gold].max(1e-300).ln()
}
