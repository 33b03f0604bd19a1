//! Losses used by the VFL training loops: softmax cross-entropy (hard and
//! soft targets) and the binary logit loss. All reductions are batch means;
//! the unreduced per-sample rows (softmax − onehot) are what the training
//! loop exposes to gradient-observing attacks.

use crate::error::{Error, Result};
use crate::numeric::Matrix;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax, numerically stabilized.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean cross-entropy over the batch with integer class labels.
///
/// Returns (loss, grad) where grad rows are (softmax − onehot)/batch.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[u32]) -> Result<(f64, Matrix)> {
    let (n, c) = (logits.rows(), logits.cols());
    if labels.len() != n {
        return Err(Error::Data(format!(
            "{} labels for a batch of {}",
            labels.len(),
            n
        )));
    }
    let mut grad = softmax_rows(logits);
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let y = y as usize;
        if y >= c {
            return Err(Error::Data(format!("label {y} out of range for {c} classes")));
        }
        let p = grad.get(r, y).max(1e-300);
        loss -= p.ln();
        let v = grad.get(r, y);
        grad.set(r, y, v - 1.0);
    }
    let inv = 1.0 / n as f64;
    grad.scale(inv);
    Ok((loss * inv, grad))
}

/// Mean cross-entropy against soft target rows (rows sum to 1).
///
/// Used for confusional-autoencoder supervision and prediction matching.
pub fn softmax_cross_entropy_soft(logits: &Matrix, targets: &Matrix) -> Result<(f64, Matrix)> {
    if logits.rows() != targets.rows() || logits.cols() != targets.cols() {
        return Err(Error::Config("soft-target shape mismatch".into()));
    }
    let n = logits.rows();
    let mut grad = softmax_rows(logits);
    let mut loss = 0.0;
    for r in 0..n {
        for c in 0..logits.cols() {
            let t = targets.get(r, c);
            if t != 0.0 {
                loss -= t * grad.get(r, c).max(1e-300).ln();
            }
        }
        for c in 0..logits.cols() {
            let v = grad.get(r, c) - targets.get(r, c);
            grad.set(r, c, v);
        }
    }
    let inv = 1.0 / n as f64;
    grad.scale(inv);
    Ok((loss * inv, grad))
}

/// Standard logistic loss on raw scores with {0,1} labels.
///
/// Returns (loss, grad) with grad_i = (σ(s_i) − y_i)/n.
pub fn sigmoid_logit_loss(scores: &[f64], labels: &[u32]) -> Result<(f64, Vec<f64>)> {
    if scores.len() != labels.len() {
        return Err(Error::Data("score/label length mismatch".into()));
    }
    let n = scores.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(scores.len());
    for (&s, &y) in scores.iter().zip(labels) {
        if y > 1 {
            return Err(Error::Data(format!("logit loss label {y} not in {{0,1}}")));
        }
        let yf = y as f64;
        // softplus(s) - y*s computed stably
        let softplus = if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
        loss += softplus - yf * s;
        grad.push((sigmoid(s) - yf) / n);
    }
    Ok((loss / n, grad))
}
