//! Minimal dense linear algebra and hand-written MLP training primitives.
//!
//! Everything computes in f64; 32-bit floats appear only as the wire-size
//! unit in communication accounting (see [`crate::vfl`]).

mod loss;
mod matrix;
mod mlp;

pub use loss::{
    sigmoid, sigmoid_logit_loss, softmax_cross_entropy, softmax_cross_entropy_soft, softmax_rows,
};
pub use matrix::Matrix;
pub use mlp::{Activation, ForwardTape, GradientSet, Layer, MlpModel};
