//! The attack catalog: each attack observes only its declared view of a
//! finished (or instrumented) run and returns an [`AttackReport`] whose
//! measure feeds the AP formula dispatch in [`crate::metrics`].

mod backdoor;
mod feature_reconstruction;
mod label_inference;

pub use backdoor::{lrb_backdoor_ap, mf_attack, nsb_attack};
pub use feature_reconstruction::{grn_attack, tbm_attack, GrnConfig, TbmConfig};
pub use label_inference::{
    amc_attack, bli_attack, dli_attack, ds_attack, model_completion, ns_attack, BliConfig,
    CompletionConfig,
};

use serde::{Deserialize, Serialize};

use crate::numeric::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Ns,
    Ds,
    Dli,
    Bli,
    Pmc,
    Amc,
    Grn,
    Tbm,
    Lrb,
    Nsb,
    Mf,
}

/// Attack families, each with its own AP formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackType {
    /// Label inference.
    Li,
    /// Feature reconstruction.
    Fr,
    /// Targeted backdoor.
    Tb,
    /// Non-targeted backdoor.
    Ntb,
}

impl AttackKind {
    pub fn attack_type(&self) -> AttackType {
        match self {
            AttackKind::Ns
            | AttackKind::Ds
            | AttackKind::Dli
            | AttackKind::Bli
            | AttackKind::Pmc
            | AttackKind::Amc => AttackType::Li,
            AttackKind::Grn | AttackKind::Tbm => AttackType::Fr,
            AttackKind::Lrb => AttackType::Tb,
            AttackKind::Nsb | AttackKind::Mf => AttackType::Ntb,
        }
    }

    /// NS and DS only apply to binary classification tasks.
    pub fn requires_binary(&self) -> bool {
        matches!(self, AttackKind::Ns | AttackKind::Ds)
    }

    /// The attacking party's role (passive except for the FR attacks).
    pub fn attacker_role(&self) -> crate::data::Role {
        match self.attack_type() {
            AttackType::Fr => crate::data::Role::Active,
            _ => crate::data::Role::Passive,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::Ns => "ns",
            AttackKind::Ds => "ds",
            AttackKind::Dli => "dli",
            AttackKind::Bli => "bli",
            AttackKind::Pmc => "pmc",
            AttackKind::Amc => "amc",
            AttackKind::Grn => "grn",
            AttackKind::Tbm => "tbm",
            AttackKind::Lrb => "lrb",
            AttackKind::Nsb => "nsb",
            AttackKind::Mf => "mf",
        }
    }
}

/// What the attack measured; the AP formula dispatch lives in
/// [`crate::metrics::compute_ap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackMeasure {
    LabelAccuracy { correct: usize, total: usize },
    Auc(f64),
    ReconstructionMse { mse: f64 },
    BackdoorRate { hits: usize, total: usize },
    MpGap { mp_all: f64, mp_attacked: f64 },
}

/// One attack execution's observations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub kind: AttackKind,
    pub measure: AttackMeasure,
    /// Per-sample predictions where applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Vec<u32>>,
    pub wall_time_secs: f64,
}

/// Rank-based (Mann–Whitney) AUC with tie-averaged ranks.
pub fn auc_from_scores(scores: &[f64], labels: &[u32]) -> f64 {
    assert_eq!(scores.len(), labels.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg_rank;
        }
        i = j + 1;
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(&y, _)| y == 1)
        .map(|(_, &r)| r)
        .sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    u / (n_pos as f64 * n_neg as f64)
}

pub(crate) fn argmax_row(row: &[f64]) -> u32 {
    let mut best = 0usize;
    for j in 1..row.len() {
        if row[j] > row[best] {
            best = j;
        }
    }
    best as u32
}

pub(crate) fn mse_between(a: &Matrix, b: &Matrix) -> f64 {
    let count = a.data().len();
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_separation_and_chance() {
        // perfectly separated scores
        let scores = [0.1, 0.2, 0.9, 0.8];
        let labels = [0, 0, 1, 1];
        assert_eq!(auc_from_scores(&scores, &labels), 1.0);
        // inverted
        assert_eq!(auc_from_scores(&scores, &[1, 1, 0, 0]), 0.0);
        // all-tied scores → 0.5 by tie averaging
        assert_eq!(auc_from_scores(&[0.5; 6], &[0, 1, 0, 1, 0, 1]), 0.5);
    }

    #[test]
    fn auc_matches_pair_counting_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let scores: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..1.0)).collect();
        let labels: Vec<u32> = (0..40).map(|_| rng.gen_range(0..2)).collect();
        // O(n²) oracle: P(score_pos > score_neg) + ½P(tie)
        let mut wins = 0.0;
        let mut total = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            for (j, &yj) in labels.iter().enumerate() {
                if yi == 1 && yj == 0 {
                    total += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        let oracle = wins / total;
        assert!((auc_from_scores(&scores, &labels) - oracle).abs() < 1e-12);
    }
}
