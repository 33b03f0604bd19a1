//! Mutual-information regularization as a Gaussian variational bottleneck:
//! the embedding is re-encoded to (μ, log σ²), a bottleneck sample
//! z = μ + σ⊙ε is decoded back to the head's expected dim, and
//! λ·KL(N(μ,σ²) ‖ N(0,I)) joins the loss.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::numeric::{GradientSet, Matrix, MlpModel};

const LOGVAR_CLAMP: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct MidLayer {
    pub encoder: MlpModel, // d -> hidden -> 2d (μ ‖ log σ²)
    pub decoder: MlpModel, // d -> hidden -> d
    dim: usize,
}

#[derive(Debug)]
pub struct MidTape {
    enc_tape: crate::numeric::ForwardTape,
    dec_tape: crate::numeric::ForwardTape,
    mu: Matrix,
    logvar: Matrix,
    eps: Matrix,
    /// Mask for gradient flow through the log-variance clamp.
    logvar_active: Vec<bool>,
}

impl MidLayer {
    /// Bottleneck dim equals the embedding dim.
    pub fn new_seeded<R: Rng>(dim: usize, rng: &mut R) -> Result<Self> {
        let hidden = (2 * dim).max(16);
        Ok(Self {
            encoder: MlpModel::new_seeded(dim, &[hidden], 2 * dim, rng)?,
            decoder: MlpModel::new_seeded(dim, &[hidden], dim, rng)?,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stochastic forward with a caller-supplied ε (tests) or sampled ε.
    pub fn forward_with_eps(&self, h: &Matrix, eps: Matrix) -> Result<(Matrix, MidTape)> {
        let (enc_out, enc_tape) = self.encoder.forward(h)?;
        let n = h.rows();
        let mut mu = Matrix::zeros(n, self.dim);
        let mut logvar = Matrix::zeros(n, self.dim);
        let mut active = vec![true; n * self.dim];
        for r in 0..n {
            for c in 0..self.dim {
                mu.set(r, c, enc_out.get(r, c));
                let raw = enc_out.get(r, c + self.dim);
                let clamped = raw.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP);
                if raw != clamped {
                    active[r * self.dim + c] = false;
                }
                logvar.set(r, c, clamped);
            }
        }
        let mut z = Matrix::zeros(n, self.dim);
        for r in 0..n {
            for c in 0..self.dim {
                let sigma = (0.5 * logvar.get(r, c)).exp();
                z.set(r, c, mu.get(r, c) + sigma * eps.get(r, c));
            }
        }
        let (out, dec_tape) = self.decoder.forward(&z)?;
        Ok((
            out,
            MidTape {
                enc_tape,
                dec_tape,
                mu,
                logvar,
                eps,
                logvar_active: active,
            },
        ))
    }

    pub fn forward<R: Rng>(&self, h: &Matrix, rng: &mut R) -> Result<(Matrix, MidTape)> {
        let mut eps = Matrix::zeros(h.rows(), self.dim);
        for v in eps.data_mut() {
            *v = StandardNormal.sample(rng);
        }
        self.forward_with_eps(h, eps)
    }

    /// Deterministic inference pass through the mean of the bottleneck.
    pub fn forward_mean(&self, h: &Matrix) -> Result<Matrix> {
        let eps = Matrix::zeros(h.rows(), self.dim);
        Ok(self.forward_with_eps(h, eps)?.0)
    }

    /// Mean KL(N(μ,σ²) ‖ N(0,I)) over the batch.
    pub fn kl(tape: &MidTape) -> f64 {
        let n = tape.mu.rows() as f64;
        let mut acc = 0.0;
        for (m, lv) in tape.mu.data().iter().zip(tape.logvar.data()) {
            acc += 0.5 * (m * m + lv.exp() - 1.0 - lv);
        }
        acc / n
    }

    /// Backward through the reparameterization path.
    ///
    /// `dout` is ∂L/∂output at natural (mean-reduced) scale; `lambda_over_n`
    /// folds in the KL weight already divided by the batch size so the
    /// penalty matches a batch-mean reduction.
    pub fn backward(
        &self,
        tape: &MidTape,
        dout: &Matrix,
        lambda_over_n: f64,
    ) -> Result<(GradientSet, GradientSet, Matrix)> {
        let (dec_grads, dz) = self.decoder.backward(&tape.dec_tape, dout)?;
        let n = dz.rows();
        let mut denc = Matrix::zeros(n, 2 * self.dim);
        for r in 0..n {
            for c in 0..self.dim {
                let dz_v = dz.get(r, c);
                let mu = tape.mu.get(r, c);
                let lv = tape.logvar.get(r, c);
                let sigma = (0.5 * lv).exp();
                // μ path: identity plus KL term λ/n·μ
                denc.set(r, c, dz_v + lambda_over_n * mu);
                // log σ² path: z = μ + e^{lv/2}·ε ⇒ ∂z/∂lv = ½σ·ε;
                // KL term λ/n·½(σ² − 1)
                let mut dlv = dz_v * 0.5 * sigma * tape.eps.get(r, c)
                    + lambda_over_n * 0.5 * (sigma * sigma - 1.0);
                if !tape.logvar_active[r * self.dim + c] {
                    dlv = 0.0;
                }
                denc.set(r, c + self.dim, dlv);
            }
        }
        let (enc_grads, dh) = self.encoder.backward(&tape.enc_tape, &denc)?;
        Ok((enc_grads, dec_grads, dh))
    }

    pub fn sgd_update(
        &mut self,
        enc_grads: &GradientSet,
        dec_grads: &GradientSet,
        lr: f64,
    ) -> Result<()> {
        self.encoder.sgd_update(enc_grads, lr)?;
        self.decoder.sgd_update(dec_grads, lr)
    }
}
