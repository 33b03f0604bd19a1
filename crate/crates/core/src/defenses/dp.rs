//! Differential-privacy style noise at the two wire sites.
//!
//! Gradient-down: rows are 2-norm clipped to 0.2, then i.i.d. noise of the
//! configured scale is added. Embedding-up: rows are 2-normalized first,
//! then noise is added.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::numeric::Matrix;

/// Per-row clip threshold applied before gradient noise.
pub const GRAD_CLIP_NORM: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Laplace,
}

fn sample_noise<R: Rng>(kind: NoiseKind, scale: f64, rng: &mut R) -> f64 {
    match kind {
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, scale).expect("scale >= 0");
            normal.sample(rng)
        }
        NoiseKind::Laplace => {
            // Inverse-CDF sampling with diversity parameter `scale`.
            let u: f64 = rng.gen_range(-0.5..0.5);
            -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
    }
}

fn clip_rows(tensor: &mut Matrix, max_norm: f64) {
    for r in 0..tensor.rows() {
        let row = tensor.row_mut(r);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > max_norm {
            let k = max_norm / norm;
            for v in row {
                *v *= k;
            }
        }
    }
}

fn normalize_rows(tensor: &mut Matrix) {
    for r in 0..tensor.rows() {
        let row = tensor.row_mut(r);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in row {
                *v /= norm;
            }
        }
    }
}

/// Gradient-down site: clip rows to [`GRAD_CLIP_NORM`], then add noise.
/// Scale 0 applies the clip only.
pub fn dp_noise_gradient<R: Rng>(
    grads: &Matrix,
    kind: NoiseKind,
    scale: f64,
    rng: &mut R,
) -> Matrix {
    let mut out = grads.clone();
    clip_rows(&mut out, GRAD_CLIP_NORM);
    if scale > 0.0 {
        for v in out.data_mut() {
            *v += sample_noise(kind, scale, rng);
        }
    }
    out
}

/// Embedding-up site: 2-normalize rows, then add noise.
pub fn dp_noise_embedding<R: Rng>(
    embedding: &Matrix,
    kind: NoiseKind,
    scale: f64,
    rng: &mut R,
) -> Matrix {
    let mut out = embedding.clone();
    normalize_rows(&mut out);
    if scale > 0.0 {
        for v in out.data_mut() {
            *v += sample_noise(kind, scale, rng);
        }
    }
    out
}
