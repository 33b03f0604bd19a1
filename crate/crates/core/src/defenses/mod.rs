//! The defense catalog and its four hook sites: gradient-down
//! (active→passive), embedding-up (passive→active), label transform
//! (active), and loss regularizers.
//!
//! Exactly one defense runs per experiment. The site a defense binds to is
//! resolved from the attacker's role (a defense protecting labels hooks the
//! downward gradients; one protecting features hooks the upward embeddings),
//! mirroring how the benchmark applies them.

mod cae;
mod dcor;
mod dp;
mod mid;
mod perturb;
mod sparsify;

pub use cae::CaeCodec;
pub use dcor::{dcor, dcor_log_penalty};
pub use dp::{dp_noise_embedding, dp_noise_gradient, NoiseKind, GRAD_CLIP_NORM};
pub use mid::{MidLayer, MidTape};
pub use perturb::grad_perturb;
pub use sparsify::{grad_discretize, grad_sparsify};

use serde::{Deserialize, Serialize};

use crate::data::Role;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefenseKind {
    GDp,
    LDp,
    Gs,
    GPer,
    DCor,
    Cae,
    Dcae,
    Mid,
}

impl DefenseKind {
    pub fn name(&self) -> &'static str {
        match self {
            DefenseKind::GDp => "g_dp",
            DefenseKind::LDp => "l_dp",
            DefenseKind::Gs => "gs",
            DefenseKind::GPer => "gper",
            DefenseKind::DCor => "dcor",
            DefenseKind::Cae => "cae",
            DefenseKind::Dcae => "dcae",
            DefenseKind::Mid => "mid",
        }
    }

    /// Defenses that only make sense on the label-holding side; they are not
    /// evaluated against feature-reconstruction attacks.
    pub fn label_side_only(&self) -> bool {
        matches!(
            self,
            DefenseKind::Gs | DefenseKind::GPer | DefenseKind::Cae | DefenseKind::Dcae
        )
    }
}

/// One configured defense: kind plus its strength parameter (semantics per
/// kind: noise scale, drop rate in percent, regularizer weight, confusion
/// strength).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenseConfig {
    pub kind: DefenseKind,
    pub strength: f64,
}

impl DefenseConfig {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DefenseKind::Gs => {
                if !(0.0..100.0).contains(&self.strength) {
                    return Err(Error::Config("GS rate must be in [0,100)".into()));
                }
            }
            _ => {
                if self.strength < 0.0 {
                    return Err(Error::Config("defense strength must be >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// The resolved hook plan a trainer executes. Built from one DefenseConfig
/// and the role of the attacker the run defends against.
#[derive(Debug, Clone, Default)]
pub struct DefensePlan {
    /// Per-sample gradient transform on the downward wire (active→passive).
    pub grad_down: Option<GradDownOp>,
    /// Embedding transform on the upward wire (passive→active).
    pub embed_up: Option<EmbedUpOp>,
    /// Label disguise codec at the active party.
    pub cae: Option<CaeCodec>,
    /// Distance-correlation regularizer weight at the active party
    /// (penalizes dependence between each embedding and Y).
    pub dcor_active: Option<f64>,
    /// Distance-correlation regularizer weight at passive parties
    /// (penalizes dependence between H_p and the party's own X_p).
    pub dcor_passive: Option<f64>,
    /// MID bottleneck weight; layers are instantiated on both sides.
    pub mid_lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum GradDownOp {
    ClipNoise { kind: NoiseKind, scale: f64 },
    Sparsify { rate_percent: f64 },
    Perturb { scale: f64 },
    Discretize { bins: usize },
}

#[derive(Debug, Clone, Copy)]
pub enum EmbedUpOp {
    NormalizeNoise { kind: NoiseKind, scale: f64 },
}

impl DefensePlan {
    /// No defense: the training loop runs bit-identical to the baseline.
    pub fn none() -> Self {
        Self::default()
    }

    /// Route a defense to its site(s) given the attacker role this run
    /// defends against.
    pub fn resolve(cfg: &DefenseConfig, attacker: Role) -> Result<Self> {
        cfg.validate()?;
        let mut plan = Self::default();
        match (cfg.kind, attacker) {
            (DefenseKind::GDp, Role::Passive) => {
                plan.grad_down = Some(GradDownOp::ClipNoise {
                    kind: NoiseKind::Gaussian,
                    scale: cfg.strength,
                });
            }
            (DefenseKind::GDp, Role::Active) => {
                plan.embed_up = Some(EmbedUpOp::NormalizeNoise {
                    kind: NoiseKind::Gaussian,
                    scale: cfg.strength,
                });
            }
            (DefenseKind::LDp, Role::Passive) => {
                plan.grad_down = Some(GradDownOp::ClipNoise {
                    kind: NoiseKind::Laplace,
                    scale: cfg.strength,
                });
            }
            (DefenseKind::LDp, Role::Active) => {
                plan.embed_up = Some(EmbedUpOp::NormalizeNoise {
                    kind: NoiseKind::Laplace,
                    scale: cfg.strength,
                });
            }
            (DefenseKind::Gs, Role::Passive) => {
                plan.grad_down = Some(GradDownOp::Sparsify {
                    rate_percent: cfg.strength,
                });
            }
            (DefenseKind::GPer, Role::Passive) => {
                plan.grad_down = Some(GradDownOp::Perturb {
                    scale: cfg.strength,
                });
            }
            (DefenseKind::DCor, Role::Passive) => plan.dcor_active = Some(cfg.strength),
            (DefenseKind::DCor, Role::Active) => plan.dcor_passive = Some(cfg.strength),
            (DefenseKind::Cae, Role::Passive) | (DefenseKind::Dcae, Role::Passive) => {
                // The codec needs the class count; the trainer installs it
                // via `install_cae`. DCAE adds gradient discretization.
                if cfg.kind == DefenseKind::Dcae {
                    plan.grad_down = Some(GradDownOp::Discretize { bins: 12 });
                }
            }
            (DefenseKind::Mid, _) => plan.mid_lambda = Some(cfg.strength),
            (kind, Role::Active) => {
                return Err(Error::Config(format!(
                    "defense {} protects labels and is not evaluated against active-party attacks",
                    kind.name()
                )));
            }
        }
        Ok(plan)
    }

    pub fn install_cae(&mut self, codec: CaeCodec) {
        self.cae = Some(codec);
    }
}
