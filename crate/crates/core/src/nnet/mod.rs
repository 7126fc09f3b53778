//! Convolutional sequence classifiers over word and character channels.
//!
//! The pieces: [`tensor`] holds the dense row-major matrix type, [`ops`]
//! the convolution/pooling/softmax primitives, [`model`] the five channel
//! layouts with their fused forward and backward passes, [`adadelta`] the
//! optimizer, [`train`] the minibatch loop with dev-set snapshot selection,
//! and [`gradcheck`] the finite-difference verification harness.

pub mod adadelta;
pub mod gradcheck;
pub mod model;
pub mod ops;
pub mod tensor;
pub mod train;

pub use adadelta::adadelta_step;
pub use gradcheck::{check_model, run_suite, GradCheckReport, GradSuiteReport, TOLERANCE};
pub use model::{
    build_variant, ChannelKind, ConvModel, EmbeddingChannel, ForwardPass, Gradients, ModelConfig,
    Variant,
};
pub use ops::{
    conv_forward, cross_entropy, max_over_time, relu, softmax, softmax_forward, ConvFilter,
    FeatureMap,
};
pub use tensor::Tensor;
pub use train::{train, EpochRecord, TrainConfig, TrainHistory};
