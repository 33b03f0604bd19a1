//! The global head: a non-trainable softmax over summed embeddings
//! (aggVFL) or a trainable linear layer over concatenated embeddings
//! (splitVFL).

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{Activation, ForwardTape, Layer, Matrix, MlpModel};

pub enum GlobalHead {
    /// softmax(Σ_k H_k); requires every embedding dim to equal the class
    /// count.
    AggSoftmax,
    /// logits = φ([H_1 ‖ … ‖ H_K]) with a single trainable linear layer.
    TrainableLinear(MlpModel),
}

pub struct HeadTape {
    /// None for AggSoftmax.
    tape: Option<ForwardTape>,
    party_dims: Vec<usize>,
}

impl GlobalHead {
    pub fn trainable_linear<R: Rng>(party_dims: &[usize], classes: usize, rng: &mut R) -> Result<Self> {
        let input: usize = party_dims.iter().sum();
        let limit = 1.0 / (input as f64).sqrt();
        let mut w = Matrix::zeros(input, classes);
        for v in w.data_mut() {
            *v = rng.gen_range(-limit..limit);
        }
        Ok(GlobalHead::TrainableLinear(MlpModel::from_layers(vec![
            Layer {
                weights: w,
                bias: vec![0.0; classes],
                activation: Activation::Identity,
            },
        ])?))
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, GlobalHead::TrainableLinear(_))
    }

    pub fn validate(&self, party_dims: &[usize], classes: usize) -> Result<()> {
        match self {
            GlobalHead::AggSoftmax => {
                if party_dims.iter().any(|&d| d != classes) {
                    return Err(Error::Config(
                        "aggVFL requires every local output dim to equal the class count".into(),
                    ));
                }
            }
            GlobalHead::TrainableLinear(model) => {
                let input: usize = party_dims.iter().sum();
                if model.input_dim() != input || model.output_dim() != classes {
                    return Err(Error::Config(format!(
                        "global head expects {}→{}, got {}→{}",
                        input,
                        classes,
                        model.input_dim(),
                        model.output_dim()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Combine per-party embeddings into logits.
    pub fn forward(&self, embeddings: &[Matrix]) -> Result<(Matrix, HeadTape)> {
        let party_dims: Vec<usize> = embeddings.iter().map(|h| h.cols()).collect();
        match self {
            GlobalHead::AggSoftmax => {
                let mut logits = embeddings[0].clone();
                for h in &embeddings[1..] {
                    logits.add_assign(h)?;
                }
                Ok((logits, HeadTape { tape: None, party_dims }))
            }
            GlobalHead::TrainableLinear(model) => {
                let mut joined = embeddings[0].clone();
                for h in &embeddings[1..] {
                    joined = joined.hcat(h)?;
                }
                let (logits, tape) = model.forward(&joined)?;
                Ok((logits, HeadTape { tape: Some(tape), party_dims }))
            }
        }
    }

    /// Split ∂L/∂logits into per-party ∂L/∂H_k blocks; for the trainable
    /// head also return its parameter gradients (same scale as `dlogits`).
    pub fn backward(
        &self,
        tape: &HeadTape,
        dlogits: &Matrix,
    ) -> Result<(Vec<Matrix>, Option<crate::numeric::GradientSet>)> {
        match self {
            GlobalHead::AggSoftmax => {
                Ok((vec![dlogits.clone(); tape.party_dims.len()], None))
            }
            GlobalHead::TrainableLinear(model) => {
                let head_tape = tape.tape.as_ref().ok_or_else(|| {
                    Error::Usage("trainable head backward without a forward tape".into())
                })?;
                let (grads, dinput) = model.backward(head_tape, dlogits)?;
                let mut blocks = Vec::with_capacity(tape.party_dims.len());
                let mut start = 0;
                for &d in &tape.party_dims {
                    let mut block = Matrix::zeros(dinput.rows(), d);
                    for r in 0..dinput.rows() {
                        block
                            .row_mut(r)
                            .copy_from_slice(&dinput.row(r)[start..start + d]);
                    }
                    blocks.push(block);
                    start += d;
                }
                Ok((blocks, Some(grads)))
            }
        }
    }

    pub fn sgd_update(&mut self, grads: &crate::numeric::GradientSet, lr: f64) -> Result<()> {
        match self {
            GlobalHead::AggSoftmax => Ok(()),
            GlobalHead::TrainableLinear(model) => model.sgd_update(grads, lr),
        }
    }
}
