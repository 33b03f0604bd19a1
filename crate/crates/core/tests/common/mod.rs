//! Shared setup for integration tests: small seeded federations over
//! synthetic blob data.

use vflforge_core::data::{
    gaussian_blobs, vertical_partition, PartyView, TabularDataset, VerticalSplit,
};
use vflforge_core::defenses::DefensePlan;
use vflforge_core::numeric::{Matrix, MlpModel};
use vflforge_core::vfl::{GlobalHead, Party, ProtocolConfig, TestSet, TrainConfig, Trainer};

pub struct Setup {
    pub train_views: Vec<PartyView>,
    pub test: TestSet,
    pub classes: usize,
    pub train_ds: TabularDataset,
}

pub fn blob_setup(
    n: usize,
    features: usize,
    classes: usize,
    parties: usize,
    spread: f64,
    weights: Option<&[f64]>,
    seed: u64,
) -> Setup {
    let ds = gaussian_blobs(n, features, classes, spread, weights, seed).unwrap();
    let (train, test) = ds.train_test_split(0.2, seed).unwrap();
    let split = VerticalSplit::equal(features, parties).unwrap();
    let train_views = vertical_partition(&train, &split).unwrap();
    let test_views = vertical_partition(&test, &split).unwrap();
    let test_set = TestSet {
        party_features: test_views.iter().map(|v| v.features.clone()).collect(),
        labels: test.labels.values().to_vec(),
    };
    Setup {
        train_views,
        test: test_set,
        classes,
        train_ds: train,
    }
}

pub fn mlp_parties(views: &[PartyView], hidden: &[usize], classes: usize, seed: u64) -> Vec<Party> {
    views
        .iter()
        .map(|v| {
            let mut rng = Trainer::party_init_rng(seed, v.party);
            let model =
                MlpModel::new_seeded(v.features.cols(), hidden, classes, &mut rng).unwrap();
            Party::new(v.clone(), model).unwrap()
        })
        .collect()
}

pub fn train_config(epochs: usize, batch: usize, lr: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: batch,
        lr_local: lr,
        lr_global: lr,
        seed,
        eval_every: None,
        target_mp: None,
    }
}

pub fn agg_trainer(setup: &Setup, hidden: &[usize], cfg: TrainConfig) -> Trainer {
    let parties = mlp_parties(&setup.train_views, hidden, setup.classes, cfg.seed);
    Trainer::new(
        parties,
        GlobalHead::AggSoftmax,
        ProtocolConfig::FedSgd,
        cfg,
        DefensePlan::none(),
        setup.classes,
    )
    .unwrap()
}

pub fn models_equal(a: &MlpModel, b: &MlpModel) -> bool {
    a.layers().len() == b.layers().len()
        && a.layers().iter().zip(b.layers()).all(|(la, lb)| {
            la.weights.data() == lb.weights.data() && la.bias == lb.bias
        })
}

#[allow(dead_code)]
pub fn matrices_equal(a: &Matrix, b: &Matrix) -> bool {
    a == b
}
