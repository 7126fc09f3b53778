//! Convolutional attribution models: the five channel layouts, seeded
//! construction, the fused forward/backward passes and container
//! round-trips.
//!
//! The forward pass never materializes embedded inputs: window responses
//! are accumulated straight from the lookup tables, one-hot character
//! channels reduce to single weight picks, and PAD rows (which embed to the
//! zero vector by contract) are skipped outright. Skipping makes padding
//! inert at the bit level: with masked pooling, growing a sequence's
//! padding cannot change any output.
//!
//! Pooling normally runs over window positions `0..T` where `T` is the
//! longest true (unpadded) length among the channels, clamped to at least
//! one; windows may overhang the physical buffer, the missing rows being
//! virtual padding. With masking disabled the pool covers the full
//! `n - h + 1` map and genuine pad-window responses (`ReLU(bias)`) become
//! visible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::features::{
    encode_text, Alphabet, TextEncoding, Vocabulary, WordEmbeddings, WORD_OFFSET, WORD_UNK,
};
use crate::nnet::ops::{dot, relu, softmax, ConvFilter};
use crate::nnet::tensor::Tensor;
use crate::rng::XorShift64;
use crate::Prediction;

/// The five channel layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Word,
    Char,
    WordWord,
    WordChar,
    WordWordChar,
}

impl Variant {
    pub const ALL: [Variant; 5] =
        [Variant::Word, Variant::Char, Variant::WordWord, Variant::WordChar, Variant::WordWordChar];

    pub fn parse(name: &str) -> Result<Variant> {
        match name.strip_prefix("cnn-").unwrap_or(name) {
            "word" => Ok(Variant::Word),
            "char" => Ok(Variant::Char),
            "word-word" => Ok(Variant::WordWord),
            "word-char" => Ok(Variant::WordChar),
            "word-word-char" => Ok(Variant::WordWordChar),
            other => Err(Error::InvalidParameter(format!("unknown model variant {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Word => "cnn-word",
            Variant::Char => "cnn-char",
            Variant::WordWord => "cnn-word-word",
            Variant::WordChar => "cnn-word-char",
            Variant::WordWordChar => "cnn-word-word-char",
        }
    }

    pub fn uses_words(&self) -> bool {
        !matches!(self, Variant::Char)
    }

    pub fn uses_chars(&self) -> bool {
        !matches!(self, Variant::Word | Variant::WordWord)
    }

    /// Word and character channels together; such models need equal padded
    /// lengths on both sides.
    pub fn is_hybrid(&self) -> bool {
        self.uses_words() && self.uses_chars()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Word,
    CharOneHot,
    CharDense,
}

impl ChannelKind {
    fn name(&self) -> &'static str {
        match self {
            ChannelKind::Word => "word",
            ChannelKind::CharOneHot => "char_onehot",
            ChannelKind::CharDense => "char_dense",
        }
    }

    fn parse(name: &str) -> Result<ChannelKind> {
        match name {
            "word" => Ok(ChannelKind::Word),
            "char_onehot" => Ok(ChannelKind::CharOneHot),
            "char_dense" => Ok(ChannelKind::CharDense),
            other => Err(Error::Container(format!("unknown channel kind {other:?}"))),
        }
    }
}

/// One embedded view of the input. Row index = token id; row 0 (PAD) is
/// all-zero and never updated. One-hot character channels hold unit basis
/// rows and are static by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingChannel {
    pub kind: ChannelKind,
    pub matrix: Tensor,
    pub is_static: bool,
}

/// Architecture knobs for [`build_variant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub embedding_dim: usize,
    pub filter_windows: Vec<usize>,
    pub maps_per_window: usize,
    pub dropout: f64,
    pub mask_pad_windows: bool,
    pub word_len_cap: usize,
    pub char_len_cap: usize,
}

impl ModelConfig {
    /// The default architecture for a variant: 300-dimensional embeddings,
    /// windows 6, 7, 8 with 100 maps each, dropout 0.5, masked pooling, and
    /// sequence caps of 500 words / 3000 characters (hybrids cap both sides
    /// at 3000 so the channels align).
    pub fn for_variant(variant: Variant) -> ModelConfig {
        let (word_len_cap, char_len_cap) = match variant {
            Variant::Word | Variant::WordWord => (500, 1),
            Variant::Char => (1, 3000),
            _ => (3000, 3000),
        };
        ModelConfig {
            variant,
            embedding_dim: 300,
            filter_windows: vec![6, 7, 8],
            maps_per_window: 100,
            dropout: 0.5,
            mask_pad_windows: true,
            word_len_cap,
            char_len_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
        }
        if self.filter_windows.is_empty() || self.filter_windows.contains(&0) {
            return Err(Error::InvalidParameter("filter windows must be positive".into()));
        }
        if self.maps_per_window == 0 {
            return Err(Error::InvalidParameter("maps_per_window must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.word_len_cap == 0 || self.char_len_cap == 0 {
            return Err(Error::InvalidParameter("length caps must be positive".into()));
        }
        if self.variant.is_hybrid() && self.word_len_cap != self.char_len_cap {
            return Err(Error::InvalidParameter(format!(
                "hybrid variants need equal word and char caps, got {} and {}",
                self.word_len_cap, self.char_len_cap
            )));
        }
        Ok(())
    }
}

/// Everything the five variants share: embedding channels, a filter bank
/// applied across all channels, and a softmax classifier over the pooled
/// feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvModel {
    pub variant: Variant,
    pub channels: Vec<EmbeddingChannel>,
    pub filters: Vec<ConvFilter>,
    /// filter count × author count.
    pub softmax_w: Tensor,
    pub softmax_b: Vec<f64>,
    pub dropout: f64,
    pub mask_pad_windows: bool,
    /// Sorted, deduplicated author labels; prediction indices point here.
    pub authors: Vec<String>,
    pub vocab: Option<Vocabulary>,
    pub alphabet: Alphabet,
    pub word_len_cap: usize,
    pub char_len_cap: usize,
    pub filter_windows: Vec<usize>,
    pub maps_per_window: usize,
    pub seed: u64,
}

/// Cached values from one forward pass, enough to drive the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Pooled feature vector as the softmax saw it (after dropout scaling).
    pub pooled: Vec<f64>,
    /// Winning window position per filter.
    pub argmax: Vec<usize>,
    /// Pre-ReLU response at the winning position per filter.
    pub pre_activation: Vec<f64>,
    /// Dropout keep mask (all true outside training).
    pub keep: Vec<bool>,
    /// Inverted-dropout scale applied to kept features.
    pub keep_scale: f64,
    pub probs: Vec<f64>,
}

/// Gradients mirroring the trainable parameters; static channels carry
/// `None`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub channels: Vec<Option<Tensor>>,
    pub filter_w: Vec<Tensor>,
    pub filter_b: Vec<f64>,
    pub softmax_w: Tensor,
    pub softmax_b: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &ConvModel) -> Gradients {
        Gradients {
            channels: model
                .channels
                .iter()
                .map(|c| {
                    if c.is_static {
                        None
                    } else {
                        Some(Tensor::zeros(c.matrix.rows(), c.matrix.cols()))
                    }
                })
                .collect(),
            filter_w: model.filters.iter().map(|f| Tensor::zeros(f.window, f.weights.cols())).collect(),
            filter_b: vec![0.0; model.filters.len()],
            softmax_w: Tensor::zeros(model.softmax_w.rows(), model.softmax_w.cols()),
            softmax_b: vec![0.0; model.softmax_b.len()],
        }
    }

    pub fn zero(&mut self) {
        for c in self.channels.iter_mut().flatten() {
            c.fill(0.0);
        }
        for w in &mut self.filter_w {
            w.fill(0.0);
        }
        self.filter_b.fill(0.0);
        self.softmax_w.fill(0.0);
        self.softmax_b.fill(0.0);
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.channels.iter_mut().flatten() {
            c.scale(s);
        }
        for w in &mut self.filter_w {
            w.scale(s);
        }
        for b in &mut self.filter_b {
            *b *= s;
        }
        self.softmax_w.scale(s);
        for b in &mut self.softmax_b {
            *b *= s;
        }
    }
}

/// Builds a freshly initialized model. Word rows come from the pretrained
/// table where available and uniform `[-0.25, 0.25)` draws otherwise; the
/// one-hot character channel is the identity with a zeroed PAD row; dense
/// character channels are random like word rows; filters and the softmax
/// layer draw from `[-0.05, 0.05)`. All draws come from one xorshift64*
/// stream seeded with `seed`, in channel → filter → softmax order.
pub fn build_variant(
    config: &ModelConfig,
    vocab: Option<Vocabulary>,
    alphabet: Alphabet,
    pretrained: Option<&WordEmbeddings>,
    authors: &[String],
    seed: u64,
) -> Result<ConvModel> {
    config.validate()?;
    if authors.is_empty() {
        return Err(Error::InvalidParameter("author list must be non-empty".into()));
    }
    let mut authors: Vec<String> = authors.to_vec();
    authors.sort_unstable();
    authors.dedup();
    let variant = config.variant;
    if variant.uses_words() && vocab.is_none() {
        return Err(Error::InvalidParameter(format!(
            "variant {} needs a vocabulary",
            variant.name()
        )));
    }
    if variant.uses_words() {
        if let Some(table) = pretrained {
            if table.dim() != config.embedding_dim {
                return Err(Error::EmbeddingDim {
                    expected: config.embedding_dim,
                    found: table.dim(),
                });
            }
        }
    }
    let k = if variant == Variant::Char { alphabet.size() } else { config.embedding_dim };
    let mut rng = XorShift64::new(seed);
    let mut channels = Vec::new();
    match variant {
        Variant::Word => {
            let m = word_matrix(vocab.as_ref().unwrap(), config.embedding_dim, pretrained, &mut rng);
            channels.push(EmbeddingChannel { kind: ChannelKind::Word, matrix: m, is_static: false });
        }
        Variant::Char => {
            channels.push(EmbeddingChannel {
                kind: ChannelKind::CharOneHot,
                matrix: onehot_matrix(&alphabet),
                is_static: true,
            });
        }
        Variant::WordWord => {
            let m = word_matrix(vocab.as_ref().unwrap(), config.embedding_dim, pretrained, &mut rng);
            channels.push(EmbeddingChannel {
                kind: ChannelKind::Word,
                matrix: m.clone(),
                is_static: true,
            });
            channels.push(EmbeddingChannel { kind: ChannelKind::Word, matrix: m, is_static: false });
        }
        Variant::WordChar => {
            let m = word_matrix(vocab.as_ref().unwrap(), config.embedding_dim, pretrained, &mut rng);
            channels.push(EmbeddingChannel { kind: ChannelKind::Word, matrix: m, is_static: false });
            channels.push(EmbeddingChannel {
                kind: ChannelKind::CharDense,
                matrix: dense_char_matrix(&alphabet, config.embedding_dim, &mut rng),
                is_static: false,
            });
        }
        Variant::WordWordChar => {
            let m = word_matrix(vocab.as_ref().unwrap(), config.embedding_dim, pretrained, &mut rng);
            channels.push(EmbeddingChannel {
                kind: ChannelKind::Word,
                matrix: m.clone(),
                is_static: true,
            });
            channels.push(EmbeddingChannel { kind: ChannelKind::Word, matrix: m, is_static: false });
            channels.push(EmbeddingChannel {
                kind: ChannelKind::CharDense,
                matrix: dense_char_matrix(&alphabet, config.embedding_dim, &mut rng),
                is_static: false,
            });
        }
    }
    let mut filters = Vec::with_capacity(config.filter_windows.len() * config.maps_per_window);
    for &h in &config.filter_windows {
        for _ in 0..config.maps_per_window {
            let weights = Tensor::uniform(h, k, -0.05, 0.05, &mut rng);
            let bias = rng.uniform(-0.05, 0.05);
            filters.push(ConvFilter { window: h, weights, bias });
        }
    }
    let softmax_w = Tensor::uniform(filters.len(), authors.len(), -0.05, 0.05, &mut rng);
    let softmax_b = (0..authors.len()).map(|_| rng.uniform(-0.05, 0.05)).collect();
    Ok(ConvModel {
        variant,
        channels,
        filters,
        softmax_w,
        softmax_b,
        dropout: config.dropout,
        mask_pad_windows: config.mask_pad_windows,
        authors,
        vocab: if variant.uses_words() { vocab } else { None },
        alphabet,
        word_len_cap: config.word_len_cap,
        char_len_cap: config.char_len_cap,
        filter_windows: config.filter_windows.clone(),
        maps_per_window: config.maps_per_window,
        seed,
    })
}

fn word_matrix(
    vocab: &Vocabulary,
    dim: usize,
    pretrained: Option<&WordEmbeddings>,
    rng: &mut XorShift64,
) -> Tensor {
    let mut m = Tensor::zeros(vocab.len() + WORD_OFFSET, dim);
    for x in m.row_mut(WORD_UNK) {
        *x = rng.uniform(-0.25, 0.25);
    }
    for (i, word) in vocab.entries().iter().enumerate() {
        let r = i + WORD_OFFSET;
        if let Some(v) = pretrained.and_then(|p| p.get(word)) {
            m.row_mut(r).copy_from_slice(v);
        } else {
            for x in m.row_mut(r) {
                *x = rng.uniform(-0.25, 0.25);
            }
        }
    }
    m
}

fn onehot_matrix(alphabet: &Alphabet) -> Tensor {
    let k = alphabet.size();
    let mut m = Tensor::zeros(k, k);
    for i in 1..k {
        m.set(i, i, 1.0);
    }
    m
}

fn dense_char_matrix(alphabet: &Alphabet, dim: usize, rng: &mut XorShift64) -> Tensor {
    let mut m = Tensor::zeros(alphabet.size(), dim);
    for r in 1..alphabet.size() {
        for x in m.row_mut(r) {
            *x = rng.uniform(-0.25, 0.25);
        }
    }
    m
}

struct ChannelView<'a> {
    channel: &'a EmbeddingChannel,
    ids: &'a [usize],
    true_len: usize,
}

impl ConvModel {
    pub fn embedding_dim(&self) -> usize {
        self.channels[0].matrix.cols()
    }

    /// Encodes a text under this model's vocabulary, alphabet and caps.
    /// Unused sides are capped at one position to keep encodings small.
    pub fn encode(&self, text: &str) -> TextEncoding {
        let word_cap = if self.variant.uses_words() { self.word_len_cap.max(1) } else { 1 };
        let char_cap = if self.variant.uses_chars() { self.char_len_cap.max(1) } else { 1 };
        let vocab = if self.variant.uses_words() { self.vocab.as_ref() } else { None };
        encode_text(text, vocab, &self.alphabet, word_cap, char_cap)
    }

    fn channel_views<'a>(&'a self, enc: &'a TextEncoding) -> Result<Vec<ChannelView<'a>>> {
        let mut views = Vec::with_capacity(self.channels.len());
        for channel in &self.channels {
            let (ids, true_len) = match channel.kind {
                ChannelKind::Word => (&enc.word_ids[..], enc.true_word_len),
                _ => (&enc.char_ids[..], enc.true_char_len),
            };
            if true_len > ids.len() {
                return Err(Error::EncodingMismatch(format!(
                    "true length {true_len} exceeds the {}-position buffer",
                    ids.len()
                )));
            }
            views.push(ChannelView { channel, ids, true_len });
        }
        if views.windows(2).any(|w| w[0].ids.len() != w[1].ids.len()) {
            return Err(Error::EncodingMismatch(
                "channel sequence lengths differ; hybrid models need equal caps".into(),
            ));
        }
        Ok(views)
    }

    /// Runs the network. Passing a generator enables inverted dropout on
    /// the pooled layer (one draw per feature map, dropped when the draw is
    /// below the dropout rate); passing `None` is the inference path.
    pub fn forward(
        &self,
        enc: &TextEncoding,
        mut dropout_rng: Option<&mut XorShift64>,
    ) -> Result<ForwardPass> {
        let views = self.channel_views(enc)?;
        let n = views[0].ids.len();
        let masked_domain = views.iter().map(|v| v.true_len).max().unwrap_or(0).max(1);
        let f_count = self.filters.len();
        let mut pooled = vec![0.0; f_count];
        let mut argmax = vec![0usize; f_count];
        let mut pre_activation = vec![0.0; f_count];
        for (fi, filter) in self.filters.iter().enumerate() {
            let positions = if self.mask_pad_windows {
                masked_domain
            } else {
                if filter.window > n {
                    return Err(Error::WindowTooLarge { n, h: filter.window });
                }
                n - filter.window + 1
            };
            let mut best = f64::NEG_INFINITY;
            let mut best_at = 0;
            let mut best_pre = 0.0;
            for i in 0..positions {
                let mut acc = filter.bias;
                for view in &views {
                    acc += window_sum(view.channel, view.ids, i, filter);
                }
                let v = relu(acc);
                if v > best {
                    best = v;
                    best_at = i;
                    best_pre = acc;
                }
            }
            pooled[fi] = best;
            argmax[fi] = best_at;
            pre_activation[fi] = best_pre;
        }

        let mut keep = vec![true; f_count];
        let mut keep_scale = 1.0;
        if let Some(rng) = dropout_rng.as_deref_mut() {
            if self.dropout > 0.0 {
                keep_scale = 1.0 / (1.0 - self.dropout);
                for (f, kept) in keep.iter_mut().enumerate() {
                    if rng.next_f64() < self.dropout {
                        *kept = false;
                        pooled[f] = 0.0;
                    } else {
                        pooled[f] *= keep_scale;
                    }
                }
            }
        }

        let mut logits = self.softmax_b.clone();
        for (f, &z) in pooled.iter().enumerate() {
            for (logit, &w) in logits.iter_mut().zip(self.softmax_w.row(f)) {
                *logit += z * w;
            }
        }
        let probs = softmax(&logits);
        Ok(ForwardPass { pooled, argmax, pre_activation, keep, keep_scale, probs })
    }

    /// Accumulates the gradients of `-ln p_gold` into `grads`. Static
    /// channels and PAD rows receive nothing; the pooled gradient routes
    /// entirely to each filter's recorded argmax window.
    pub fn backward(
        &self,
        enc: &TextEncoding,
        pass: &ForwardPass,
        gold: usize,
        grads: &mut Gradients,
    ) -> Result<()> {
        let views = self.channel_views(enc)?;
        let mut dlogits = pass.probs.clone();
        dlogits[gold] -= 1.0;
        for (g, d) in grads.softmax_b.iter_mut().zip(&dlogits) {
            *g += d;
        }
        for (fi, filter) in self.filters.iter().enumerate() {
            let z = pass.pooled[fi];
            let w_row = self.softmax_w.row(fi);
            let g_row = grads.softmax_w.row_mut(fi);
            let mut d_pooled = 0.0;
            for (a, &dl) in dlogits.iter().enumerate() {
                g_row[a] += z * dl;
                d_pooled += w_row[a] * dl;
            }
            if !pass.keep[fi] || pass.pre_activation[fi] <= 0.0 {
                continue;
            }
            let ds = d_pooled * pass.keep_scale;
            grads.filter_b[fi] += ds;
            let start = pass.argmax[fi];
            for (ci, view) in views.iter().enumerate() {
                for j in 0..filter.window {
                    let r = start + j;
                    if r >= view.ids.len() {
                        break;
                    }
                    let id = view.ids[r];
                    if id == 0 {
                        continue;
                    }
                    match view.channel.kind {
                        ChannelKind::CharOneHot => {
                            grads.filter_w[fi].row_mut(j)[id] += ds;
                        }
                        _ => {
                            let x = view.channel.matrix.row(id);
                            for (g, &xv) in grads.filter_w[fi].row_mut(j).iter_mut().zip(x) {
                                *g += ds * xv;
                            }
                        }
                    }
                    if let Some(gm) = grads.channels[ci].as_mut() {
                        let w = filter.weights.row(j);
                        for (g, &wv) in gm.row_mut(id).iter_mut().zip(w) {
                            *g += ds * wv;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn predict_proba(&self, text: &str) -> Result<Vec<f64>> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let enc = self.encode(text);
        Ok(self.forward(&enc, None)?.probs)
    }

    /// Attributes `text` to the most probable author (first maximum on
    /// ties, which with sorted labels is the lexicographically smallest).
    /// Texts whose used channels carry no real tokens are flagged
    /// low-confidence.
    pub fn predict(&self, text: &str) -> Result<Prediction> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let enc = self.encode(text);
        let pass = self.forward(&enc, None)?;
        let mut best = 0;
        for (a, &p) in pass.probs.iter().enumerate() {
            if p > pass.probs[best] {
                best = a;
            }
        }
        let mut signal = 0usize;
        if self.variant.uses_words() {
            signal += enc.true_word_len;
        }
        if self.variant.uses_chars() {
            signal += enc.true_char_len;
        }
        Ok(Prediction {
            author: self.authors[best].clone(),
            score: pass.probs[best],
            low_confidence: signal == 0,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let channels_meta: Vec<serde_json::Value> = self
            .channels
            .iter()
            .map(|c| {
                serde_json::json!({
                    "kind": c.kind.name(),
                    "static": c.is_static,
                    "rows": c.matrix.rows(),
                    "cols": c.matrix.cols(),
                })
            })
            .collect();
        let metadata = serde_json::json!({
            "model": "cnn",
            "variant": self.variant.name(),
            "filter_windows": self.filter_windows,
            "maps_per_window": self.maps_per_window,
            "dropout": self.dropout,
            "mask_pad_windows": self.mask_pad_windows,
            "word_len_cap": self.word_len_cap,
            "char_len_cap": self.char_len_cap,
            "seed": self.seed,
            "authors": self.authors,
            "vocab": self.vocab.as_ref().map(|v| v.entries().to_vec()),
            "vocab_max_size": self.vocab.as_ref().map(|v| v.max_size()),
            "alphabet": self.alphabet.to_lines(),
            "channels": channels_meta,
        });
        let mut container = Container::new(metadata);
        for (i, c) in self.channels.iter().enumerate() {
            container.push_f64(format!("channel_{i}"), c.matrix.data().to_vec());
        }
        let mut filter_weights = Vec::new();
        for f in &self.filters {
            filter_weights.extend_from_slice(f.weights.data());
        }
        container.push_f64("filter_weights", filter_weights);
        container.push_f64("filter_bias", self.filters.iter().map(|f| f.bias).collect());
        container.push_f64("softmax_w", self.softmax_w.data().to_vec());
        container.push_f64("softmax_b", self.softmax_b.clone());
        container.write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ConvModel> {
        let c = Container::read(path)?;
        c.expect_model("cnn")?;
        let variant = Variant::parse(c.meta_str("variant")?)
            .map_err(|e| Error::Container(e.to_string()))?;
        let filter_windows: Vec<usize> = c
            .meta("filter_windows")?
            .as_array()
            .ok_or_else(|| Error::Container("filter_windows is not an array".into()))?
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Container("filter window is not an integer".into()))
            })
            .collect::<Result<_>>()?;
        let maps_per_window = c.meta_usize("maps_per_window")?;
        let authors = c.meta_string_list("authors")?;
        if authors.is_empty() {
            return Err(Error::Container("model has no author labels".into()));
        }
        let vocab = if c.meta("vocab")?.is_null() {
            None
        } else {
            Some(Vocabulary::from_entries(
                c.meta_string_list("vocab")?,
                c.meta_usize("vocab_max_size")?,
            ))
        };
        let alphabet = Alphabet::from_lines(&c.meta_string_list("alphabet")?)?;
        let channels_meta = c
            .meta("channels")?
            .as_array()
            .ok_or_else(|| Error::Container("channels metadata is not an array".into()))?
            .clone();
        let mut channels = Vec::with_capacity(channels_meta.len());
        for (i, meta) in channels_meta.iter().enumerate() {
            let kind = ChannelKind::parse(
                meta.get("kind")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Error::Container("channel kind missing".into()))?,
            )?;
            let is_static = meta
                .get("static")
                .and_then(|v| v.as_bool())
                .ok_or_else(|| Error::Container("channel static flag missing".into()))?;
            let rows = meta
                .get("rows")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Container("channel rows missing".into()))?
                as usize;
            let cols = meta
                .get("cols")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Container("channel cols missing".into()))?
                as usize;
            let data = c.f64_section(&format!("channel_{i}"))?;
            if data.len() != rows * cols {
                return Err(Error::Container(format!("channel_{i} section has the wrong size")));
            }
            channels.push(EmbeddingChannel {
                kind,
                matrix: Tensor::from_flat(rows, cols, data.to_vec()),
                is_static,
            });
        }
        if channels.is_empty() {
            return Err(Error::Container("model has no channels".into()));
        }
        let k = channels[0].matrix.cols();
        let f_count = filter_windows.len() * maps_per_window;
        let weights_flat = c.f64_section("filter_weights")?;
        let expected: usize = filter_windows.iter().map(|h| h * k * maps_per_window).sum();
        if weights_flat.len() != expected {
            return Err(Error::Container("filter_weights section has the wrong size".into()));
        }
        let biases = c.f64_section("filter_bias")?;
        if biases.len() != f_count {
            return Err(Error::Container("filter_bias section has the wrong size".into()));
        }
        let mut filters = Vec::with_capacity(f_count);
        let mut offset = 0;
        let mut bias_iter = biases.iter();
        for &h in &filter_windows {
            for _ in 0..maps_per_window {
                let len = h * k;
                let weights =
                    Tensor::from_flat(h, k, weights_flat[offset..offset + len].to_vec());
                offset += len;
                filters.push(ConvFilter { window: h, weights, bias: *bias_iter.next().unwrap() });
            }
        }
        let softmax_flat = c.f64_section("softmax_w")?;
        if softmax_flat.len() != f_count * authors.len() {
            return Err(Error::Container("softmax_w section has the wrong size".into()));
        }
        let softmax_w = Tensor::from_flat(f_count, authors.len(), softmax_flat.to_vec());
        let softmax_b = c.f64_section("softmax_b")?.to_vec();
        if softmax_b.len() != authors.len() {
            return Err(Error::Container("softmax_b section has the wrong size".into()));
        }
        Ok(ConvModel {
            variant,
            channels,
            filters,
            softmax_w,
            softmax_b,
            dropout: c.meta_f64("dropout")?,
            mask_pad_windows: c.meta_bool("mask_pad_windows")?,
            authors,
            vocab,
            alphabet,
            word_len_cap: c.meta_usize("word_len_cap")?,
            char_len_cap: c.meta_usize("char_len_cap")?,
            filter_windows,
            maps_per_window,
            seed: c.meta_u64("seed")?,
        })
    }
}

/// Contribution of one channel to the window starting at `start`: the sum
/// over the window rows of `w_j . embed(id)`. Rows past the physical buffer
/// are virtual padding and PAD ids embed to zero; both are skipped, so
/// padding never contributes a single floating-point operation.
fn window_sum(channel: &EmbeddingChannel, ids: &[usize], start: usize, filter: &ConvFilter) -> f64 {
    let mut acc = 0.0;
    for j in 0..filter.window {
        let r = start + j;
        if r >= ids.len() {
            break;
        }
        let id = ids[r];
        if id == 0 {
            continue;
        }
        match channel.kind {
            ChannelKind::CharOneHot => acc += filter.weights.row(j)[id],
            _ => acc += dot(filter.weights.row(j), channel.matrix.row(id)),
        }
    }
    acc
}
