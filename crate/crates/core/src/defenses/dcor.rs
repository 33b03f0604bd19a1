//! Sample distance correlation (pairwise-distance double-centering
//! estimator) with an analytic gradient for the log-penalty regularizer.

use crate::error::{Error, Result};
use crate::numeric::Matrix;

fn pairwise_distances(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (a, b) in m.row(i).iter().zip(m.row(j)) {
                let diff = a - b;
                acc += diff * diff;
            }
            let dist = acc.sqrt();
            d.set(i, j, dist);
            d.set(j, i, dist);
        }
    }
    d
}

fn double_center(d: &Matrix) -> Matrix {
    let n = d.rows();
    let mut row_means = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        let s: f64 = d.row(i).iter().sum();
        row_means[i] = s / n as f64;
        grand += s;
    }
    grand /= (n * n) as f64;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, d.get(i, j) - row_means[i] - row_means[j] + grand);
        }
    }
    out
}

fn mean_product(a: &Matrix, b: &Matrix) -> f64 {
    let n2 = (a.rows() * a.rows()) as f64;
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum::<f64>() / n2
}

/// Distance correlation in [0,1] between the rows of `x` and `y`.
/// Zero-variance inputs yield 0.
pub fn dcor(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::Config("dcor inputs must share the sample axis".into()));
    }
    if x.rows() < 2 {
        return Err(Error::Config("dcor needs a batch of at least 2".into()));
    }
    let a = double_center(&pairwise_distances(x));
    let b = double_center(&pairwise_distances(y));
    let sxy = mean_product(&a, &b);
    let sxx = mean_product(&a, &a);
    let syy = mean_product(&b, &b);
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(0.0);
    }
    let r2 = (sxy / (sxx * syy).sqrt()).clamp(0.0, 1.0);
    Ok(r2.sqrt())
}

/// α·log(dCor(x, target)) and its analytic gradient with respect to `x`.
///
/// Returns None when the estimator degenerates (constant x or target, or
/// dCor numerically 0), in which case the penalty is skipped.
pub fn dcor_log_penalty(x: &Matrix, target: &Matrix, alpha: f64) -> Result<Option<(f64, Matrix)>> {
    if x.rows() != target.rows() {
        return Err(Error::Config("dcor inputs must share the sample axis".into()));
    }
    let n = x.rows();
    if n < 2 {
        return Err(Error::Config("dcor needs a batch of at least 2".into()));
    }
    let dist_x = pairwise_distances(x);
    let a = double_center(&dist_x);
    let b = double_center(&pairwise_distances(target));
    let sxy = mean_product(&a, &b);
    let sxx = mean_product(&a, &a);
    let syy = mean_product(&b, &b);
    if sxx <= 0.0 || syy <= 0.0 || sxy <= 1e-12 {
        return Ok(None);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(0.0, 1.0).sqrt();
    let penalty = alpha * r.ln();

    // log dCor = ½·(log Sxy − ½ log Sxx − ½ log Syy); Syy is constant in x.
    // ∂Sxy/∂x_i = (2/n²)·Σ_j B_ij (x_i − x_j)/‖x_i − x_j‖
    // ∂Sxx/∂x_i = (4/n²)·Σ_j A_ij (x_i − x_j)/‖x_i − x_j‖
    let n2 = (n * n) as f64;
    let d = x.cols();
    let mut grad = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dist = dist_x.get(i, j);
            if dist <= 0.0 {
                continue;
            }
            // coefficient combining both terms of the log derivative
            let coeff = 0.5 * ((2.0 / n2) * b.get(i, j) / sxy
                - 0.5 * (4.0 / n2) * a.get(i, j) / sxx);
            let gi = grad.row_mut(i);
            for k in 0..d {
                gi[k] += alpha * coeff * (x.get(i, k) - x.get(j, k)) / dist;
            }
        }
    }
    Ok(Some((penalty, grad)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent naive oracle: explicit double loops, no shared helpers.
    fn dcor_oracle(x: &Matrix, y: &Matrix) -> f64 {
        let n = x.rows();
        let dist = |m: &Matrix, i: usize, j: usize| -> f64 {
            m.row(i)
                .iter()
                .zip(m.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let centered = |m: &Matrix| -> Vec<Vec<f64>> {
            let mut raw = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    raw[i][j] = dist(m, i, j);
                }
            }
            let grand: f64 = raw.iter().flatten().sum::<f64>() / (n * n) as f64;
            let rm: Vec<f64> = raw.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
            let mut out = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    out[i][j] = raw[i][j] - rm[i] - rm[j] + grand;
                }
            }
            out
        };
        let a = centered(x);
        let b = centered(y);
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for i in 0..n {
            for j in 0..n {
                sxy += a[i][j] * b[i][j];
                sxx += a[i][j] * a[i][j];
                syy += b[i][j] * b[i][j];
            }
        }
        if sxx <= 0.0 || syy <= 0.0 {
            return 0.0;
        }
        ((sxy / (n * n) as f64) / ((sxx / (n * n) as f64) * (syy / (n * n) as f64)).sqrt())
            .clamp(0.0, 1.0)
            .sqrt()
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(rows, cols);
        for v in m.data_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        m
    }

    #[test]
    fn identical_matrices_have_dcor_one() {
        let x = random_matrix(12, 3, 0);
        let r = dcor(&x, &x).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // log term is 0 at dCor = 1
        let (penalty, _) = dcor_log_penalty(&x, &x, 0.3).unwrap().unwrap();
        assert!(penalty.abs() < 1e-10);
    }

    #[test]
    fn constant_input_degenerates_to_zero_and_skips() {
        let x = Matrix::zeros(8, 2);
        let y = random_matrix(8, 2, 1);
        assert_eq!(dcor(&x, &y).unwrap(), 0.0);
        assert!(dcor_log_penalty(&x, &y, 0.3).unwrap().is_none());
    }

    #[test]
    fn matches_naive_oracle() {
        for seed in 0..5 {
            let x = random_matrix(15, 4, seed);
            let y = random_matrix(15, 2, seed + 100);
            let fast = dcor(&x, &y).unwrap();
            let slow = dcor_oracle(&x, &y);
            assert!((fast - slow).abs() < 1e-10, "seed {seed}: {fast} vs {slow}");
        }
    }

    #[test]
    fn estimator_stays_in_unit_interval() {
        for seed in 0..10 {
            let x = random_matrix(9, 3, seed);
            let y = random_matrix(9, 5, seed * 7 + 1);
            let r = dcor(&x, &y).unwrap();
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut x = random_matrix(8, 3, 42);
        let y = random_matrix(8, 2, 43);
        let alpha = 0.25;
        let (_, grad) = dcor_log_penalty(&x, &y, alpha).unwrap().unwrap();
        let h = 1e-6;
        for idx in 0..x.data().len() {
            let orig = x.data()[idx];
            x.data_mut()[idx] = orig + h;
            let up = dcor_log_penalty(&x, &y, alpha).unwrap().unwrap().0;
            x.data_mut()[idx] = orig - h;
            let down = dcor_log_penalty(&x, &y, alpha).unwrap().unwrap().0;
            x.data_mut()[idx] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grad.data()[idx];
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(
                (numeric - analytic).abs() / denom < 1e-4,
                "idx {idx}: {numeric} vs {analytic}"
            );
        }
    }
}
