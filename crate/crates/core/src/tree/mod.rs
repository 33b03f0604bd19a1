//! Tree-based VFL: vertically federated random forest and XGBoost with
//! percentile split candidates, gini/gain evaluation, optional
//! Paillier-encrypted statistic aggregation, and federated inference.
//!
//! Split statistics are fixed-point integers in both the plaintext and the
//! encrypted route, so the two produce bit-identical trees on a seed.

mod split;
mod train;

pub use split::{gini_eval, percentile_candidates, xgb_gain_eval, GiniStats, XgbStats};
pub use train::{encrypted_stat_aggregation, tree_train, EncryptionConfig, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Fixed-point scale for gradient/hessian statistics (bits).
pub const STAT_SCALE_BITS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    RandomForest,
    Xgboost,
}

/// Leaf payload: a class distribution (random forest) or a regression
/// weight (XGBoost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue {
    Distribution(Vec<f64>),
    Weight(f64),
}

/// One node; internal nodes reference a feature local to the owning party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: LeafValue,
    },
    Internal {
        owner: usize,
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Route one sample through the tree; each internal node's comparison
    /// is answered by the owning party's feature matrix.
    pub fn route<'a>(&'a self, party_features: &[Matrix], row: usize) -> &'a LeafValue {
        match self {
            TreeNode::Leaf { value } => value,
            TreeNode::Internal {
                owner,
                feature,
                threshold,
                left,
                right,
            } => {
                if party_features[*owner].get(row, *feature) < *threshold {
                    left.route(party_features, row)
                } else {
                    right.route(party_features, row)
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A trained federation of trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub kind: TreeKind,
    pub classes: usize,
    /// XGBoost learning rate η_t; unused for random forest.
    pub learning_rate: f64,
    /// (one-vs-rest class for multiclass XGBoost, root). RF and binary
    /// XGBoost trees carry None.
    pub trees: Vec<(Option<usize>, TreeNode)>,
}

impl TreeModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Data(format!("bad tree model JSON: {e}")))
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(|(_, t)| t.node_count()).sum()
    }

    /// Federated inference: RF majority over tree distributions, XGBoost
    /// η-weighted margins through sigmoid/one-vs-rest argmax.
    pub fn predict(&self, party_features: &[Matrix]) -> Vec<u32> {
        let n = party_features[0].rows();
        let mut out = Vec::with_capacity(n);
        match self.kind {
            TreeKind::RandomForest => {
                for row in 0..n {
                    let mut dist = vec![0.0; self.classes];
                    for (_, tree) in &self.trees {
                        if let LeafValue::Distribution(d) = tree.route(party_features, row) {
                            for (acc, v) in dist.iter_mut().zip(d) {
                                *acc += v;
                            }
                        }
                    }
                    out.push(argmax(&dist));
                }
            }
            TreeKind::Xgboost => {
                for row in 0..n {
                    if self.classes == 2 {
                        let mut margin = 0.0;
                        for (_, tree) in &self.trees {
                            if let LeafValue::Weight(w) = tree.route(party_features, row) {
                                margin += self.learning_rate * w;
                            }
                        }
                        out.push(u32::from(margin > 0.0));
                    } else {
                        let mut margins = vec![0.0; self.classes];
                        for (class, tree) in &self.trees {
                            let c = class.expect("multiclass trees are tagged");
                            if let LeafValue::Weight(w) = tree.route(party_features, row) {
                                margins[c] += self.learning_rate * w;
                            }
                        }
                        out.push(argmax(&margins));
                    }
                }
            }
        }
        out
    }

    pub fn accuracy(&self, party_features: &[Matrix], labels: &[u32]) -> f64 {
        let preds = self.predict(party_features);
        preds.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
    }
}

fn argmax(values: &[f64]) -> u32 {
    let mut best = 0usize;
    for j in 1..values.len() {
        if values[j] > values[best] {
            best = j;
        }
    }
    best as u32
}
