//! Gradient perturbation with class-mean directions (label-DP style):
//! every per-sample gradient gets a random mix of the batch's per-class
//! mean gradients added, blurring which class the sample belongs to.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// g_i ← g_i + Σ_c u_{i,c}·ḡ_c with u ~ N(0, scale²); ḡ_c are the
/// per-class mean gradients of the current batch.
pub fn grad_perturb<R: Rng>(
    grads: &Matrix,
    labels: &[u32],
    class_count: usize,
    scale: f64,
    rng: &mut R,
) -> Result<Matrix> {
    if labels.len() != grads.rows() {
        return Err(Error::Config("labels do not match gradient rows".into()));
    }
    let mut out = grads.clone();
    if scale == 0.0 {
        return Ok(out);
    }
    let cols = grads.cols();
    let mut means = Matrix::zeros(class_count, cols);
    let mut counts = vec![0usize; class_count];
    for (r, &y) in labels.iter().enumerate() {
        counts[y as usize] += 1;
        let dst = means.row_mut(y as usize);
        for (d, s) in dst.iter_mut().zip(grads.row(r)) {
            *d += s;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let inv = 1.0 / count as f64;
            for v in means.row_mut(c) {
                *v *= inv;
            }
        }
    }
    let normal = Normal::new(0.0, scale).map_err(|e| Error::Config(e.to_string()))?;
    for r in 0..out.rows() {
        for c in 0..class_count {
            if counts[c] == 0 {
                continue;
            }
            let u = normal.sample(rng);
            let row = out.row_mut(r);
            for (v, m) in row.iter_mut().zip(means.row(c)) {
                *v += u * m;
            }
        }
    }
    Ok(out)
}
