//! The NN-based VFL engine: party orchestration, aggVFL/splitVFL heads,
//! the communication protocols, defense hook points, and byte accounting.

mod compress;
mod head;
mod party;
mod trainer;

pub use compress::{quantize_embedding, topk_sparsify};
pub use head::GlobalHead;
pub use party::{Party, PartyTape};
pub use trainer::{
    AmcPlan, BatchRecord, InferenceTamper, LrbPlan, QueryHandle, RecordEpoch, RecordingConfig,
    RunObservations, SampleGrads, TestSet, TrainReport, Trainer, Trigger,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Communication protocol for the embedding/gradient exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "protocol")]
pub enum ProtocolConfig {
    FedSgd,
    /// One exchange per Q local update steps. Q=1 degenerates to FedSGD.
    FedBcd { q: usize },
    /// FedSGD with b-bit uniform quantization of the upward embeddings.
    Quantize { b: u8 },
    /// FedSGD keeping only the r·count largest-magnitude embedding entries.
    TopK { r: f64 },
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProtocolConfig::FedSgd => Ok(()),
            ProtocolConfig::FedBcd { q } => {
                if *q < 1 {
                    Err(Error::Config("FedBCD needs Q >= 1".into()))
                } else {
                    Ok(())
                }
            }
            ProtocolConfig::Quantize { b } => {
                if *b == 8 || *b == 16 {
                    Ok(())
                } else {
                    Err(Error::Config("quantize bits must be 8 or 16".into()))
                }
            }
            ProtocolConfig::TopK { r } => {
                if *r > 0.0 && *r <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config("top-k ratio must be in (0,1]".into()))
                }
            }
        }
    }

    pub fn local_steps(&self) -> usize {
        match self {
            ProtocolConfig::FedBcd { q } => *q,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolConfig::FedSgd => "fedsgd",
            ProtocolConfig::FedBcd { .. } => "fedbcd",
            ProtocolConfig::Quantize { .. } => "quantize",
            ProtocolConfig::TopK { .. } => "topk",
        }
    }
}

/// Training hyper-parameters for one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// η2: local model learning rate.
    pub lr_local: f64,
    /// η1: global head learning rate (splitVFL only).
    pub lr_global: f64,
    pub seed: u64,
    /// Exchanges between test-MP probes; None probes at each epoch end.
    pub eval_every: Option<usize>,
    /// Stop once the probed test MP reaches this value.
    pub target_mp: Option<f64>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.lr_local < 0.0 || self.lr_global < 0.0 {
            return Err(Error::Config("learning rates must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-round record of exchanged payload bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBytes {
    pub up: u64,
    pub down: u64,
}

/// Ledger of communication rounds and bytes, passive↔active.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CommLedger {
    pub per_round: Vec<RoundBytes>,
    total_up: u64,
    total_down: u64,
}

impl CommLedger {
    pub fn record_round(&mut self, up: u64, down: u64) {
        self.per_round.push(RoundBytes { up, down });
        self.total_up += up;
        self.total_down += down;
    }

    pub fn rounds(&self) -> u64 {
        self.per_round.len() as u64
    }

    pub fn total_bytes(&self) -> u64 {
        self.total_up + self.total_down
    }

    pub fn total_up(&self) -> u64 {
        self.total_up
    }

    pub fn total_down(&self) -> u64 {
        self.total_down
    }

    /// Per-round amount in binary MB when every round carried the same
    /// payload (constant batch size).
    pub fn amount_mb(&self) -> Option<f64> {
        let first = *self.per_round.first()?;
        if self.per_round.iter().all(|r| *r == first) {
            Some((first.up + first.down) as f64 / (1u64 << 20) as f64)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Wire bytes per round for one passive↔active pair, with floats as 32-bit
/// wire units. Compression applies to the upward (embedding) direction
/// only.
pub fn account_bytes(
    protocol: &ProtocolConfig,
    batch: usize,
    classes: usize,
    direction: Direction,
) -> u64 {
    let count = (batch * classes) as u64;
    match direction {
        Direction::Down => count * 4,
        Direction::Up => match protocol {
            ProtocolConfig::FedSgd | ProtocolConfig::FedBcd { .. } => count * 4,
            ProtocolConfig::Quantize { b } => count * (*b as u64) / 8 + 8,
            ProtocolConfig::TopK { r } => {
                let keep = ((r * count as f64) - 1e-9).ceil().max(1.0) as u64;
                keep.min(count) * 4
            }
        },
    }
}

/// Round-trip per-round amount in binary MB for one passive↔active pair.
pub fn account_amount_mb(protocol: &ProtocolConfig, batch: usize, classes: usize) -> f64 {
    let bytes = account_bytes(protocol, batch, classes, Direction::Up)
        + account_bytes(protocol, batch, classes, Direction::Down);
    bytes as f64 / (1u64 << 20) as f64
}

/// First round index (1-based) whose probe reached the target MP.
pub fn rounds_to_target(history: &[(u64, f64)], target: f64) -> Option<u64> {
    history.iter().find(|(_, mp)| *mp >= target).map(|(r, _)| *r)
}
