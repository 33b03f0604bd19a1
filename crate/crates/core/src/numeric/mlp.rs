//! Dense feed-forward networks with hand-written backprop.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => super::sigmoid(z),
        }
    }

    /// Derivative expressed through the pre-activation value.
    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = super::sigmoid(z);
                s * (1.0 - s)
            }
        }
    }
}

/// One dense layer: `y = act(x·W + b)`, weights stored (in_dim × out_dim).
#[derive(Debug, Clone)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }
}

/// A multi-layer perceptron. Adjacent layer dims chain; shape violations are
/// rejected at construction.
#[derive(Debug, Clone)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

/// Per-layer activations cached by a forward pass; consumed by `backward`.
#[derive(Debug)]
pub struct ForwardTape {
    /// Input to each layer (batch × in_dim).
    inputs: Vec<Matrix>,
    /// Pre-activation of each layer (batch × out_dim).
    pre_activations: Vec<Matrix>,
}

/// Parameter gradients, shape-congruent with the owning model.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            weights: model
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.in_dim(), l.out_dim()))
                .collect(),
            biases: model.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for w in &mut self.weights {
            w.scale(k);
        }
        for b in &mut self.biases {
            for v in b {
                *v *= k;
            }
        }
    }
}

impl MlpModel {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("model needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Config(format!(
                    "layer dims do not chain: {} -> {}",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Seeded init: weights uniform in [−1/√fan_in, +1/√fan_in], biases zero.
    /// Hidden layers use ReLU, the output layer is linear.
    pub fn new_seeded<R: Rng>(
        input_dim: usize,
        hidden: &[usize],
        output_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(output_dim);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for i in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[i], dims[i + 1]);
            if fan_in == 0 || fan_out == 0 {
                return Err(Error::Config("layer dims must be positive".into()));
            }
            let limit = 1.0 / (fan_in as f64).sqrt();
            let mut w = Matrix::zeros(fan_in, fan_out);
            for v in w.data_mut() {
                *v = rng.gen_range(-limit..limit);
            }
            let activation = if i + 1 < dims.len() - 1 {
                Activation::Relu
            } else {
                Activation::Identity
            };
            layers.push(Layer {
                weights: w,
                bias: vec![0.0; fan_out],
                activation,
            });
        }
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.in_dim() * l.out_dim() + l.out_dim())
            .sum()
    }

    /// Forward pass; the tape suffices for an exact backward pass.
    pub fn forward(&self, inputs: &Matrix) -> Result<(Matrix, ForwardTape)> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::Config(format!(
                "input has {} columns, model expects {}",
                inputs.cols(),
                self.input_dim()
            )));
        }
        let mut tape = ForwardTape {
            inputs: Vec::with_capacity(self.layers.len()),
            pre_activations: Vec::with_capacity(self.layers.len()),
        };
        let mut x = inputs.clone();
        for layer in &self.layers {
            let mut z = x.matmul(&layer.weights)?;
            for r in 0..z.rows() {
                let row = z.row_mut(r);
                for (v, b) in row.iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            tape.inputs.push(x);
            let mut out = z.clone();
            for v in out.data_mut() {
                *v = layer.activation.apply(*v);
            }
            tape.pre_activations.push(z);
            x = out;
        }
        Ok((x, tape))
    }

    /// Convenience forward without keeping the tape.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        Ok(self.forward(inputs)?.0)
    }

    /// Chain-rule backward pass from `output_grad` (∂L/∂output).
    ///
    /// Returns parameter gradients and ∂L/∂inputs.
    pub fn backward(
        &self,
        tape: &ForwardTape,
        output_grad: &Matrix,
    ) -> Result<(GradientSet, Matrix)> {
        if tape.inputs.len() != self.layers.len() {
            return Err(Error::Usage("tape does not match this model".into()));
        }
        let last = self.layers.len() - 1;
        if output_grad.rows() != tape.pre_activations[last].rows()
            || output_grad.cols() != self.output_dim()
        {
            return Err(Error::Usage(
                "output_grad shape does not match the forward output".into(),
            ));
        }
        let mut grads = GradientSet::zeros_like(self);
        let mut upstream = output_grad.clone();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let z = &tape.pre_activations[l];
            if z.cols() != layer.out_dim() || tape.inputs[l].cols() != layer.in_dim() {
                return Err(Error::Usage("stale tape for this model".into()));
            }
            // dz = upstream ⊙ act'(z)
            let mut dz = upstream;
            for (g, &pre) in dz.data_mut().iter_mut().zip(z.data()) {
                *g *= layer.activation.derivative(pre);
            }
            grads.weights[l] = tape.inputs[l].t_matmul(&dz)?;
            let db = &mut grads.biases[l];
            for r in 0..dz.rows() {
                for (acc, g) in db.iter_mut().zip(dz.row(r)) {
                    *acc += g;
                }
            }
            upstream = dz.matmul_t(&layer.weights)?;
        }
        Ok((grads, upstream))
    }

    /// θ ← θ − lr·∇θ, elementwise.
    pub fn sgd_update(&mut self, grads: &GradientSet, lr: f64) -> Result<()> {
        if grads.weights.len() != self.layers.len() {
            return Err(Error::Config("gradient set does not match model".into()));
        }
        for (layer, (gw, gb)) in self
            .layers
            .iter_mut()
            .zip(grads.weights.iter().zip(&grads.biases))
        {
            if gw.rows() != layer.in_dim() || gw.cols() != layer.out_dim() {
                return Err(Error::Config("gradient shape mismatch".into()));
            }
            for (w, g) in layer.weights.data_mut().iter_mut().zip(gw.data()) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
        Ok(())
    }
}
