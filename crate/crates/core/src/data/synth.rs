//! Seeded Gaussian-blob generator for property tests and desk-scale runs
//! that do not need a real dataset.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::TabularDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Gaussian blobs with one center per class, clipped to [0,1].
///
/// `class_weights` controls imbalance (defaults to uniform); `spread` is the
/// per-feature standard deviation around the class center.
pub fn gaussian_blobs(
    n: usize,
    features: usize,
    classes: usize,
    spread: f64,
    class_weights: Option<&[f64]>,
    seed: u64,
) -> Result<TabularDataset> {
    if classes == 0 || features == 0 || n == 0 {
        return Err(Error::Config("blobs need n, features, classes > 0".into()));
    }
    let weights: Vec<f64> = match class_weights {
        Some(w) => {
            if w.len() != classes || w.iter().any(|&x| x <= 0.0) {
                return Err(Error::Config("bad class weights".into()));
            }
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        }
        None => vec![1.0 / classes as f64; classes],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Matrix::zeros(classes, features);
    for v in centers.data_mut() {
        *v = rng.gen_range(0.2..0.8);
    }
    let noise = Normal::new(0.0, spread).map_err(|e| Error::Config(e.to_string()))?;

    let mut x = Matrix::zeros(n, features);
    let mut y = Vec::with_capacity(n);
    for r in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut cls = classes - 1;
        for (c, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                cls = c;
                break;
            }
        }
        y.push(cls as u32);
        let row = x.row_mut(r);
        for (j, v) in row.iter_mut().enumerate() {
            *v = (centers.get(cls, j) + noise.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    TabularDataset::new(x, y, classes)
}
