//! Simulation engine for vertical federated learning (VFL) benchmarks.
//!
//! The crate trains split/aggregated VFL models over feature-partitioned data,
//! runs a catalog of label-inference / feature-reconstruction / backdoor
//! attacks against the recorded training traces, applies the matching defense
//! hooks, and scores every (attack, defense) pair with the DCS family of
//! metrics. Everything is seeded and single-threaded per experiment so runs
//! replay bit-for-bit.
//!
//! Module map:
//! - [`numeric`]: dense matrices, MLP forward/backward, losses, SGD
//! - [`data`]: CSV/IDX ingestion, normalization, vertical partitioning, batching
//! - [`vfl`]: the NN-based VFL engine (aggVFL/splitVFL, FedSGD/FedBCD,
//!   compression, communication accounting)
//! - [`paillier`]: additively homomorphic Paillier plus HE-protected logistic
//!   training with Taylor-approximated gradients
//! - [`tree`]: tree-based VFL (random forest / XGBoost, optional encrypted
//!   statistic aggregation)
//! - [`attacks`]: the 11-attack catalog
//! - [`defenses`]: the 8-defense catalog and its hook sites
//! - [`metrics`]: AP formula dispatch and DCS / T-DCS / C-DCS scoring
//! - [`harness`]: JSON experiment configs, seeded runners, report emission

pub mod attacks;
pub mod data;
pub mod defenses;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numeric;
pub mod paillier;
pub mod tree;
pub mod vfl;

pub use error::{Error, Result};
pub use numeric::{GradientSet, Matrix, MlpModel};
