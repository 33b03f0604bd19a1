//! Gradient sparsification and discretization.

use crate::numeric::Matrix;

/// Zero the `rate_percent`% smallest-magnitude entries of the tensor,
/// keeping the rest exact. The surviving count is ⌈(1−rate)·len⌉.
pub fn grad_sparsify(grads: &Matrix, rate_percent: f64) -> Matrix {
    let mut out = grads.clone();
    let len = out.data().len();
    if rate_percent <= 0.0 || len == 0 {
        return out;
    }
    // ⌈(1−rate)·len⌉ with an epsilon snap so exact-integer products are not
    // pushed up by floating-point dust.
    let keep = (((1.0 - rate_percent / 100.0) * len as f64) - 1e-9).ceil().max(0.0) as usize;
    let drop = len - keep.min(len);
    if drop == 0 {
        return out;
    }
    // indices of the `drop` smallest |v|, ties broken by index for determinism
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| {
        let ka = grads.data()[a].abs();
        let kb = grads.data()[b].abs();
        ka.partial_cmp(&kb).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(drop) {
        out.data_mut()[i] = 0.0;
    }
    out
}

/// Snap every value to the nearest of `bins` evenly spaced levels over
/// [min, max] (endpoints are levels). Constant tensors are returned
/// unchanged.
pub fn grad_discretize(grads: &Matrix, bins: usize) -> Matrix {
    let mut out = grads.clone();
    if bins < 2 {
        return out;
    }
    let (lo, hi) = out.min_max();
    let span = hi - lo;
    if span == 0.0 {
        return out;
    }
    let width = span / (bins - 1) as f64;
    for v in out.data_mut() {
        let k = ((*v - lo) / width).round();
        *v = lo + k * width;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_zero_is_identity() {
        let g = Matrix::from_rows(&[vec![0.5, -0.1, 0.0]]).unwrap();
        assert_eq!(grad_sparsify(&g, 0.0), g);
    }

    #[test]
    fn exact_survivor_count() {
        let vals: Vec<f64> = (1..=1000).map(|i| i as f64 / 1000.0).collect();
        let g = Matrix::from_vec(1, 1000, vals).unwrap();
        let out = grad_sparsify(&g, 99.5);
        let nonzero = out.data().iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, 5);
    }

    #[test]
    fn survivors_are_the_magnitude_top_set() {
        let g = Matrix::from_vec(1, 6, vec![0.3, -1.0, 0.05, 2.0, -0.2, 0.0]).unwrap();
        let out = grad_sparsify(&g, 50.0);
        // sort oracle: keep ceil(0.5*6)=3 largest |v|: 2.0, -1.0, 0.3
        assert_eq!(out.data(), &[0.3, -1.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn discretize_constant_unchanged() {
        let g = Matrix::from_vec(1, 4, vec![0.7; 4]).unwrap();
        assert_eq!(grad_discretize(&g, 12), g);
    }

    #[test]
    fn discretize_twelve_even_values_unchanged() {
        // 12 distinct evenly spaced values are exactly the 12 levels.
        let levels: Vec<f64> = (0..12).map(|i| -0.3 + i as f64 * 0.05).collect();
        let g = Matrix::from_vec(1, 12, levels.clone()).unwrap();
        let out = grad_discretize(&g, 12);
        for (a, b) in out.data().iter().zip(&levels) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn discretize_level_count_bounded() {
        let vals: Vec<f64> = (0..500).map(|i| (i as f64 * 0.013).sin()).collect();
        let out = grad_discretize(&Matrix::from_vec(1, 500, vals).unwrap(), 12);
        let mut levels: Vec<u64> = out.data().iter().map(|v| v.to_bits()).collect();
        levels.sort_unstable();
        levels.dedup();
        assert!(levels.len() <= 12);
    }
}
