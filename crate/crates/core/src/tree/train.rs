//! Federated tree construction per the recursive broadcast/propose/select
//! protocol: the active party broadcasts a node's record indices, every
//! party proposes percentile split candidates with statistics, the active
//! party picks the best, and the winning party materializes the child
//! index sets.
//!
//! Statistics are per-sample vectors (class indicators for RF; fixed-point
//! gradient/hessian pairs for XGBoost) supplied by the active party either
//! in plaintext or Paillier-encrypted; bucket sums are exact integers in
//! both routes, so tree structure is independent of encryption.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, Matrix};
use crate::paillier::{keygen, Ciphertext, PaillierPrivateKey, PaillierPublicKey};
use crate::tree::split::xgb_leaf_weight;
use crate::tree::{
    gini_eval, percentile_candidates, xgb_gain_eval, GiniStats, LeafValue, TreeKind, TreeModel,
    TreeNode, XgbStats, STAT_SCALE_BITS,
};

#[derive(Debug, Clone, Copy)]
pub struct EncryptionConfig {
    pub key_bits: u64,
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub kind: TreeKind,
    pub num_trees: usize,
    pub max_depth: usize,
    /// XGBoost η_t.
    pub learning_rate: f64,
    /// XGBoost λ_x.
    pub lambda: f64,
    /// XGBoost γ_x.
    pub gamma: f64,
    pub max_bins: usize,
    pub min_node_size: usize,
    /// RF row subsample fraction per tree, without replacement.
    pub rf_subsample: f64,
    pub seed: u64,
    pub encryption: Option<EncryptionConfig>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            kind: TreeKind::RandomForest,
            num_trees: 5,
            max_depth: 6,
            learning_rate: 0.003,
            lambda: 1.0,
            gamma: 0.0,
            max_bins: 32,
            min_node_size: 2,
            rf_subsample: 0.8,
            seed: 0,
            encryption: None,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.num_trees == 0 || self.max_depth == 0 {
            return Err(Error::Config("need num_trees >= 1 and depth >= 1".into()));
        }
        if !(0.0 < self.rf_subsample && self.rf_subsample <= 1.0) {
            return Err(Error::Config("rf subsample must be in (0,1]".into()));
        }
        if self.max_bins < 2 {
            return Err(Error::Config("max_bins must be >= 2".into()));
        }
        Ok(())
    }
}

/// Homomorphic bucket sums: for every bucket, the componentwise sum of the
/// encrypted per-sample statistic vectors. Empty buckets yield Enc(0).
pub fn encrypted_stat_aggregation(
    pk: &PaillierPublicKey,
    enc_stats: &[Vec<Ciphertext>],
    buckets: &[Vec<usize>],
) -> Result<Vec<Vec<Ciphertext>>> {
    let dim = enc_stats.first().map_or(0, |v| v.len());
    buckets
        .iter()
        .map(|bucket| {
            let mut sums = vec![pk.zero(); dim];
            for &row in bucket {
                let stat = enc_stats
                    .get(row)
                    .ok_or_else(|| Error::Crypto("bucket row out of range".into()))?;
                for (acc, c) in sums.iter_mut().zip(stat) {
                    *acc = pk.he_add(acc, c)?;
                }
            }
            Ok(sums)
        })
        .collect()
}

/// Per-sample statistic vectors at fixed-point integer scale, plus the
/// transport they travel over.
enum StatRoute {
    Plain,
    Encrypted {
        pk: PaillierPublicKey,
        sk: PaillierPrivateKey,
        enc: Vec<Vec<Ciphertext>>,
    },
}

struct StatProvider {
    /// Per-sample signed fixed-point statistic vectors.
    values: Vec<Vec<i128>>,
    route: StatRoute,
}

impl StatProvider {
    fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    /// Node totals are computed by the active party from its own plaintext
    /// statistics in both routes.
    fn total(&self, rows: &[usize]) -> Vec<i128> {
        let mut acc = vec![0i128; self.dim()];
        for &r in rows {
            for (a, v) in acc.iter_mut().zip(&self.values[r]) {
                *a += v;
            }
        }
        acc
    }

    /// Left-bucket sums for a list of buckets (one per candidate). The
    /// plaintext route sums integers; the encrypted route aggregates
    /// ciphertexts at the proposing party and decrypts at the active party.
    fn bucket_sums(&self, buckets: &[Vec<usize>]) -> Result<Vec<Vec<i128>>> {
        match &self.route {
            StatRoute::Plain => Ok(buckets
                .iter()
                .map(|bucket| {
                    let mut acc = vec![0i128; self.dim()];
                    for &r in bucket {
                        for (a, v) in acc.iter_mut().zip(&self.values[r]) {
                            *a += v;
                        }
                    }
                    acc
                })
                .collect()),
            StatRoute::Encrypted { pk, sk, enc } => {
                let encrypted = encrypted_stat_aggregation(pk, enc, buckets)?;
                let half_n = &pk.n >> 1;
                encrypted
                    .iter()
                    .map(|sums| {
                        sums.iter()
                            .map(|c| {
                                let plain = sk.decrypt(c)?;
                                Ok(decode_signed(&plain, &half_n, &pk.n))
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

fn decode_signed(value: &BigUint, half_n: &BigUint, n: &BigUint) -> i128 {
    if value > half_n {
        let mag = n - value;
        -(biguint_to_i128(&mag))
    } else {
        biguint_to_i128(value)
    }
}

fn biguint_to_i128(v: &BigUint) -> i128 {
    let digits = v.to_u64_digits();
    match digits.len() {
        0 => 0,
        1 => digits[0] as i128,
        2 => ((digits[1] as i128) << 64) | digits[0] as i128,
        _ => panic!("statistic overflow beyond 128 bits"),
    }
}

fn encode_signed(v: i128, n: &BigUint) -> BigUint {
    if v >= 0 {
        BigUint::from(v as u128)
    } else {
        n - BigUint::from(v.unsigned_abs())
    }
}

struct ChosenSplit {
    party: usize,
    feature: usize,
    threshold: f64,
    score: f64,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
    left_stats: Vec<i128>,
    right_stats: Vec<i128>,
}

/// Search every party's percentile candidates for the best split of the
/// node's rows. Ties break on (party, candidate index) for determinism.
fn best_split(
    party_features: &[Matrix],
    rows: &[usize],
    stats: &StatProvider,
    kind: TreeKind,
    params: &TreeParams,
    total: &[i128],
) -> Result<Option<ChosenSplit>> {
    let scale = (STAT_SCALE_BITS as f64).exp2();
    let mut best: Option<ChosenSplit> = None;
    for (party, features) in party_features.iter().enumerate() {
        let mut candidate_idx = 0usize;
        for feature in 0..features.cols() {
            let values: Vec<f64> = rows.iter().map(|&r| features.get(r, feature)).collect();
            let thresholds = percentile_candidates(&values, params.max_bins);
            if thresholds.is_empty() {
                continue;
            }
            // owner-side bucketing: rows with value < t per candidate
            let buckets: Vec<Vec<usize>> = thresholds
                .iter()
                .map(|&t| {
                    rows.iter()
                        .copied()
                        .filter(|&r| features.get(r, feature) < t)
                        .collect()
                })
                .collect();
            let sums = stats.bucket_sums(&buckets)?;
            for ((&threshold, bucket), left_stats) in
                thresholds.iter().zip(&buckets).zip(sums)
            {
                let n_left = bucket.len();
                let n_right = rows.len() - n_left;
                candidate_idx += 1;
                if n_left == 0 || n_right == 0 {
                    continue;
                }
                let right_stats: Vec<i128> = total
                    .iter()
                    .zip(&left_stats)
                    .map(|(t, l)| t - l)
                    .collect();
                let score = match kind {
                    TreeKind::RandomForest => {
                        let gs = GiniStats {
                            left: left_stats.iter().map(|&v| v as u64).collect(),
                            right: right_stats.iter().map(|&v| v as u64).collect(),
                        };
                        gini_eval(&gs)
                    }
                    TreeKind::Xgboost => {
                        let xs = XgbStats {
                            g_left: left_stats[0] as f64 / scale,
                            h_left: left_stats[1] as f64 / scale,
                            g_right: right_stats[0] as f64 / scale,
                            h_right: right_stats[1] as f64 / scale,
                        };
                        xgb_gain_eval(&xs, params.lambda, params.gamma)
                    }
                };
                let improves = match &best {
                    None => true,
                    Some(b) => score > b.score,
                };
                if improves {
                    let left_rows = bucket.clone();
                    let right_rows: Vec<usize> = rows
                        .iter()
                        .copied()
                        .filter(|&r| features.get(r, feature) >= threshold)
                        .collect();
                    best = Some(ChosenSplit {
                        party,
                        feature,
                        threshold,
                        score,
                        left_rows,
                        right_rows,
                        left_stats,
                        right_stats,
                    });
                }
            }
        }
        let _ = candidate_idx;
    }
    Ok(best)
}

fn leaf_from_stats(stats: &[i128], kind: TreeKind, params: &TreeParams, n: usize) -> LeafValue {
    match kind {
        TreeKind::RandomForest => {
            let total: i128 = stats.iter().sum::<i128>().max(1);
            LeafValue::Distribution(
                stats
                    .iter()
                    .map(|&c| c as f64 / total as f64)
                    .collect(),
            )
        }
        TreeKind::Xgboost => {
            let scale = (STAT_SCALE_BITS as f64).exp2();
            let g = stats[0] as f64 / scale;
            let h = stats[1] as f64 / scale;
            let _ = n;
            LeafValue::Weight(xgb_leaf_weight(g, h, params.lambda))
        }
    }
}

fn build_node(
    party_features: &[Matrix],
    rows: Vec<usize>,
    depth: usize,
    stats: &StatProvider,
    kind: TreeKind,
    params: &TreeParams,
) -> Result<TreeNode> {
    let total = stats.total(&rows);
    let make_leaf = |stats_vec: &[i128]| TreeNode::Leaf {
        value: leaf_from_stats(stats_vec, kind, params, rows.len()),
    };
    if depth >= params.max_depth || rows.len() < params.min_node_size {
        return Ok(make_leaf(&total));
    }
    if kind == TreeKind::RandomForest {
        let nonzero = total.iter().filter(|&&c| c > 0).count();
        if nonzero <= 1 {
            return Ok(make_leaf(&total)); // pure node
        }
    }
    let chosen = best_split(party_features, &rows, stats, kind, params, &total)?;
    let chosen = match chosen {
        Some(c) if c.score > 0.0 => c,
        _ => return Ok(make_leaf(&total)),
    };
    debug_assert_eq!(
        chosen.left_rows.len() + chosen.right_rows.len(),
        rows.len(),
        "child index sets must partition the parent"
    );
    let left = build_node(
        party_features,
        chosen.left_rows,
        depth + 1,
        stats,
        kind,
        params,
    )?;
    let right = build_node(
        party_features,
        chosen.right_rows,
        depth + 1,
        stats,
        kind,
        params,
    )?;
    let _ = (&chosen.left_stats, &chosen.right_stats);
    Ok(TreeNode::Internal {
        owner: chosen.party,
        feature: chosen.feature,
        threshold: chosen.threshold,
        left: Box::new(left),
        right: Box::new(right),
    })
}

/// Train a tree-based VFL model over vertically partitioned features; the
/// labels belong to the active party (by convention the caller passes them
/// from its view).
pub fn tree_train(
    party_features: &[Matrix],
    labels: &[u32],
    classes: usize,
    params: &TreeParams,
) -> Result<TreeModel> {
    params.validate()?;
    let n = party_features
        .first()
        .map(|m| m.rows())
        .ok_or_else(|| Error::Config("no parties".into()))?;
    if n == 0 {
        return Err(Error::Config("empty training set".into()));
    }
    if party_features.iter().any(|m| m.rows() != n) || labels.len() != n {
        return Err(Error::Config("parties disagree on record ids".into()));
    }

    let mut keys = match params.encryption {
        Some(enc) => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(9000);
            let (pk, sk) = keygen(enc.key_bits, &mut rng)?;
            Some((pk, sk, rng))
        }
        None => None,
    };

    let scale = (STAT_SCALE_BITS as f64).exp2();
    let mut trees: Vec<(Option<usize>, TreeNode)> = Vec::with_capacity(params.num_trees);
    // XGBoost running margins (per class for multiclass one-vs-rest)
    let margin_classes = if classes == 2 { 1 } else { classes };
    let mut margins = vec![vec![0.0f64; n]; margin_classes];

    for tree_idx in 0..params.num_trees {
        // per-sample statistic vectors for this boosting round
        let (values, class_tag): (Vec<Vec<i128>>, Option<usize>) = match params.kind {
            TreeKind::RandomForest => {
                let v = labels
                    .iter()
                    .map(|&y| {
                        let mut onehot = vec![0i128; classes];
                        onehot[y as usize] = 1;
                        onehot
                    })
                    .collect();
                (v, None)
            }
            TreeKind::Xgboost => {
                let c = tree_idx % margin_classes;
                let tag = if classes == 2 { None } else { Some(c) };
                let v = labels
                    .iter()
                    .enumerate()
                    .map(|(i, &y)| {
                        let target = if classes == 2 {
                            y as f64
                        } else {
                            f64::from(y as usize == c)
                        };
                        let p = sigmoid(margins[c][i]);
                        let g = p - target;
                        let h = p * (1.0 - p);
                        vec![(g * scale).round() as i128, (h * scale).round() as i128]
                    })
                    .collect();
                (v, tag)
            }
        };

        let route = match &mut keys {
            None => StatRoute::Plain,
            Some((pk, sk, rng)) => {
                // the active party encrypts its per-sample statistics once
                // per tree and distributes them to the passive parties
                let enc: Vec<Vec<Ciphertext>> = values
                    .iter()
                    .map(|stat| {
                        stat.iter()
                            .map(|&v| pk.encrypt(&encode_signed(v, &pk.n), rng))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                StatRoute::Encrypted {
                    pk: pk.clone(),
                    sk: sk.clone(),
                    enc,
                }
            }
        };
        let stats = StatProvider { values, route };

        // root rows: RF subsamples per tree; XGBoost boosts on all rows
        let rows: Vec<usize> = match params.kind {
            TreeKind::RandomForest if params.rf_subsample < 1.0 => {
                let mut order: Vec<usize> = (0..n).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(7000 + tree_idx as u64);
                order.shuffle(&mut rng);
                let keep = ((params.rf_subsample * n as f64).floor() as usize).max(1);
                let mut rows = order[..keep].to_vec();
                rows.sort_unstable();
                rows
            }
            _ => (0..n).collect(),
        };

        let root = build_node(party_features, rows, 0, &stats, params.kind, params)?;

        // update margins for boosting
        if params.kind == TreeKind::Xgboost {
            let c = tree_idx % margin_classes;
            for i in 0..n {
                if let LeafValue::Weight(w) = root.route(party_features, i) {
                    margins[c][i] += params.learning_rate * w;
                }
            }
        }
        trees.push((class_tag, root));
    }

    Ok(TreeModel {
        kind: params.kind,
        classes,
        learning_rate: params.learning_rate,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_encoding_round_trip() {
        let n = BigUint::from(1_000_003u64) * BigUint::from(999_983u64);
        let half = &n >> 1;
        for v in [0i128, 1, -1, 123456789, -987654321] {
            let enc = encode_signed(v, &n);
            assert_eq!(decode_signed(&enc, &half, &n), v);
        }
    }

    #[test]
    fn single_feature_separable_toy_data() {
        let features = vec![Matrix::from_rows(&[
            vec![0.1],
            vec![0.2],
            vec![0.8],
            vec![0.9],
        ])
        .unwrap()];
        let labels = vec![0, 0, 1, 1];
        let params = TreeParams {
            kind: TreeKind::RandomForest,
            num_trees: 1,
            max_depth: 3,
            rf_subsample: 1.0,
            ..TreeParams::default()
        };
        let model = tree_train(&features, &labels, 2, &params).unwrap();
        assert_eq!(model.trees[0].1.depth(), 1);
        assert_eq!(model.accuracy(&features, &labels), 1.0);
    }

    #[test]
    fn empty_training_set_is_config_error() {
        let features = vec![Matrix::zeros(0, 0); 1];
        assert!(matches!(
            tree_train(&features, &[], 2, &TreeParams::default()),
            Err(Error::Config(_))
        ));
    }
}
