//! Dataset ingestion, normalization, vertical partitioning and batching.

mod csv_load;
mod idx;
mod synth;

pub use csv_load::{load_csv, CsvSchema};
pub use idx::load_mnist_idx;
pub use synth::gaussian_blobs;

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Class labels with a read-audit counter. Every access to the underlying
/// ids bumps the counter, which the label-confinement tests inspect.
#[derive(Debug)]
pub struct Labels {
    values: Vec<u32>,
    reads: AtomicU64,
}

impl Labels {
    pub fn new(values: Vec<u32>) -> Self {
        Self {
            values,
            reads: AtomicU64::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Audited access to the class ids.
    pub fn values(&self) -> &[u32] {
        self.reads.fetch_add(1, Ordering::Relaxed);
        &self.values
    }

    /// Audited gather of a batch of labels.
    pub fn gather(&self, idx: &[usize]) -> Vec<u32> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        idx.iter().map(|&i| self.values[i]).collect()
    }

    pub fn read_count(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }
}

impl Clone for Labels {
    fn clone(&self) -> Self {
        Self::new(self.values.clone())
    }
}

/// A dataset of N samples with F features and integer class labels.
#[derive(Debug, Clone)]
pub struct TabularDataset {
    pub features: Matrix,
    pub labels: Labels,
    pub class_count: usize,
    pub feature_names: Option<Vec<String>>,
}

impl TabularDataset {
    pub fn new(features: Matrix, labels: Vec<u32>, class_count: usize) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if labels.len() != features.rows() {
            return Err(Error::Data("label count does not match row count".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y as usize >= class_count) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self {
            features,
            labels: Labels::new(labels),
            class_count,
            feature_names: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    /// Seeded shuffle then split: the first `1 − test_fraction` of the
    /// permutation becomes train, the rest test.
    pub fn train_test_split(&self, test_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::Config("test fraction must be in [0,1)".into()));
        }
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let n_test = ((n as f64) * test_fraction).round() as usize;
        let (test_idx, train_idx) = order.split_at(n_test);
        Ok((self.subset(train_idx), self.subset(test_idx)))
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let features = self.features.select_rows(idx);
        let labels = self.labels.gather(idx);
        Self {
            features,
            labels: Labels::new(labels),
            class_count: self.class_count,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Per-party column assignment. Exactly one active party; the column sets
/// must be disjoint and cover [0, F).
#[derive(Debug, Clone)]
pub struct VerticalSplit {
    pub party_cols: Vec<Vec<usize>>,
    pub active_party: usize,
}

impl VerticalSplit {
    /// Contiguous equal-width split; the last party is active.
    pub fn equal(feature_count: usize, parties: usize) -> Result<Self> {
        if parties == 0 || feature_count < parties {
            return Err(Error::Config("cannot split features among parties".into()));
        }
        let base = feature_count / parties;
        let extra = feature_count % parties;
        let mut party_cols = Vec::with_capacity(parties);
        let mut start = 0;
        for p in 0..parties {
            let width = base + usize::from(p < extra);
            party_cols.push((start..start + width).collect());
            start += width;
        }
        Ok(Self {
            party_cols,
            active_party: parties - 1,
        })
    }

    /// Contiguous split with explicit widths, last party active.
    pub fn by_widths(widths: &[usize]) -> Result<Self> {
        let mut party_cols = Vec::with_capacity(widths.len());
        let mut start = 0;
        for &w in widths {
            party_cols.push((start..start + w).collect());
            start += w;
        }
        if widths.is_empty() {
            return Err(Error::Config("no parties".into()));
        }
        Ok(Self {
            party_cols,
            active_party: widths.len() - 1,
        })
    }

    pub fn parties(&self) -> usize {
        self.party_cols.len()
    }

    pub fn validate(&self, feature_count: usize) -> Result<()> {
        if self.active_party >= self.party_cols.len() {
            return Err(Error::Config("active party index out of range".into()));
        }
        let mut seen = vec![false; feature_count];
        for cols in &self.party_cols {
            for &c in cols {
                if c >= feature_count {
                    return Err(Error::Config(format!("column {c} out of range")));
                }
                if seen[c] {
                    return Err(Error::Config(format!("column {c} assigned twice")));
                }
                seen[c] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Config("column sets do not cover all features".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Role {
    Active,
    Passive,
}

/// One party's view of the data: its own columns, plus labels iff active.
#[derive(Debug, Clone)]
pub struct PartyView {
    pub party: usize,
    pub role: Role,
    pub features: Matrix,
    pub labels: Option<Labels>,
}

/// Split a dataset by feature among parties. Passive views carry no labels.
pub fn vertical_partition(ds: &TabularDataset, split: &VerticalSplit) -> Result<Vec<PartyView>> {
    split.validate(ds.feature_count())?;
    let mut views = Vec::with_capacity(split.parties());
    for (p, cols) in split.party_cols.iter().enumerate() {
        let mut features = Matrix::zeros(ds.len(), cols.len());
        for r in 0..ds.len() {
            let src = ds.features.row(r);
            let dst = features.row_mut(r);
            for (j, &c) in cols.iter().enumerate() {
                dst[j] = src[c];
            }
        }
        let role = if p == split.active_party {
            Role::Active
        } else {
            Role::Passive
        };
        let labels = match role {
            Role::Active => Some(Labels::new(ds.labels.gather(&(0..ds.len()).collect::<Vec<_>>()))),
            Role::Passive => None,
        };
        views.push(PartyView {
            party: p,
            role,
            features,
            labels,
        });
    }
    Ok(views)
}

/// Per-column min-max normalization to [0,1]; constant columns map to 0.
pub fn normalize_minmax(ds: &TabularDataset) -> TabularDataset {
    let mut out = ds.clone();
    let (n, f) = (out.features.rows(), out.features.cols());
    for c in 0..f {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..n {
            let v = out.features.get(r, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for r in 0..n {
            let v = out.features.get(r, c);
            let scaled = if span == 0.0 { 0.0 } else { (v - lo) / span };
            out.features.set(r, c, scaled);
        }
    }
    out
}

/// A seeded permutation of 0..n for the given epoch, chunked into batches.
/// All parties iterate the same sequence, keeping samples aligned.
pub fn batch_iter(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch_size must be >= 1");
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch.wrapping_add(1));
    order.shuffle(&mut rng);
    order.chunks(batch_size).map(|c| c.to_vec()).collect()
}
