//! Confusional autoencoder: the active party supervises training with
//! encoded soft labels and recovers true predictions through the paired
//! decoder at inference. An entropy bonus on the encoder output spreads
//! each class over multiple classes (the confusion).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{softmax_rows, Activation, Layer, Matrix, MlpModel};

#[derive(Debug, Clone)]
pub struct CaeCodec {
    decoder: MlpModel, // C -> C logits
    class_count: usize,
    pub confusion_strength: f64,
    /// enc(onehot_c) rows cached after pretraining; the trained encoder is
    /// fully characterized by its outputs on the C one-hot inputs.
    soft_codes: Matrix,
}

/// ∂H(p)/∂z for p = softmax(z): p_j·(−log p_j − H).
fn entropy_grad_wrt_logits(p: &[f64]) -> Vec<f64> {
    let h: f64 = -p.iter().map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }).sum::<f64>();
    p.iter()
        .map(|&v| if v > 0.0 { v * (-v.ln() - h) } else { 0.0 })
        .collect()
}

/// Softmax jacobian-vector product: given p and ∂L/∂p, return ∂L/∂z.
fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let dot: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(&pi, &di)| pi * (di - dot)).collect()
}

impl CaeCodec {
    /// Pretrain the codec for `class_count` classes with confusion strength
    /// λ₂. The loss is CE(decoder(encoder(y)), y) − λ₂·H(encoder(y));
    /// pretraining fails loudly if the one-hot round trip is not exact.
    pub fn train(class_count: usize, lambda2: f64, seed: u64) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::Config("CAE needs at least 2 classes".into()));
        }
        let c = class_count;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCAE0_CAE0);
        // Single linear codec layers initialized to a scaled identity: with
        // no confusion the encoder settles at a near-identity code instead of
        // an arbitrary permutation.
        let identity_leaning = |rng: &mut ChaCha8Rng| -> Result<MlpModel> {
            let mut w = Matrix::zeros(c, c);
            for i in 0..c {
                for j in 0..c {
                    let base = if i == j { 4.0 } else { 0.0 };
                    w.set(i, j, base + rng.gen_range(-0.01..0.01));
                }
            }
            MlpModel::from_layers(vec![Layer {
                weights: w,
                bias: vec![0.0; c],
                activation: Activation::Identity,
            }])
        };
        let mut encoder = identity_leaning(&mut rng)?;
        let mut decoder = identity_leaning(&mut rng)?;

        let onehots = Matrix::identity(c);
        let labels: Vec<u32> = (0..c as u32).collect();
        let lr = 0.5;
        let steps = 4000;
        for _ in 0..steps {
            let (enc_logits, enc_tape) = encoder.forward(&onehots)?;
            let p = softmax_rows(&enc_logits);
            let (dec_logits, dec_tape) = decoder.forward(&p)?;
            let (_, dec_out_grad) = crate::numeric::softmax_cross_entropy(&dec_logits, &labels)?;
            let (dec_grads, dp_ce) = decoder.backward(&dec_tape, &dec_out_grad)?;

            // encoder logit gradient: CE pulled through the softmax, minus
            // the entropy bonus (loss subtracts λ₂·H)
            let mut denc = Matrix::zeros(c, c);
            let inv_n = 1.0 / c as f64;
            for r in 0..c {
                let ce_part = softmax_backward(p.row(r), dp_ce.row(r));
                let ent_part = entropy_grad_wrt_logits(p.row(r));
                let dst = denc.row_mut(r);
                for j in 0..c {
                    dst[j] = ce_part[j] - lambda2 * inv_n * ent_part[j];
                }
            }
            let (enc_grads, _) = encoder.backward(&enc_tape, &denc)?;
            encoder.sgd_update(&enc_grads, lr)?;
            decoder.sgd_update(&dec_grads, lr)?;
        }

        let (enc_logits, _) = encoder.forward(&onehots)?;
        let soft_codes = softmax_rows(&enc_logits);
        let codec = Self {
            decoder,
            class_count,
            confusion_strength: lambda2,
            soft_codes,
        };
        for cls in 0..c as u32 {
            if codec.recover_row(codec.soft_codes.row(cls as usize)) != cls {
                return Err(Error::Config(format!(
                    "CAE pretraining failed the one-hot round trip at λ₂={lambda2}"
                )));
            }
        }
        Ok(codec)
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Soft labels the active party supervises with.
    pub fn apply(&self, labels: &[u32]) -> Matrix {
        let mut out = Matrix::zeros(labels.len(), self.class_count);
        for (r, &y) in labels.iter().enumerate() {
            out.row_mut(r).copy_from_slice(self.soft_codes.row(y as usize));
        }
        out
    }

    fn recover_row(&self, soft: &[f64]) -> u32 {
        let m = Matrix::from_vec(1, soft.len(), soft.to_vec()).unwrap();
        let dec = self.decoder.predict(&m).unwrap();
        let mut best = 0usize;
        for j in 1..self.class_count {
            if dec.get(0, j) > dec.get(0, best) {
                best = j;
            }
        }
        best as u32
    }

    /// Recover true predictions from the head's probability output.
    pub fn recover(&self, head_probs: &Matrix) -> Result<Vec<u32>> {
        if head_probs.cols() != self.class_count {
            return Err(Error::Config("CAE recover dimension mismatch".into()));
        }
        let dec = self.decoder.predict(head_probs)?;
        let mut out = Vec::with_capacity(dec.rows());
        for r in 0..dec.rows() {
            let mut best = 0usize;
            for j in 1..self.class_count {
                if dec.get(r, j) > dec.get(r, best) {
                    best = j;
                }
            }
            out.push(best as u32);
        }
        Ok(out)
    }

    /// Mean entropy of the class codes, in nats. 0 = no confusion.
    pub fn code_entropy(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.class_count {
            for &p in self.soft_codes.row(r) {
                if p > 0.0 {
                    acc -= p * p.ln();
                }
            }
        }
        acc / self.class_count as f64
    }
}
