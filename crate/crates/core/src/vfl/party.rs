//! One VFL participant: its feature view, local model, and optional MID
//! bottleneck stack.

use rand_chacha::ChaCha8Rng;

use crate::data::{PartyView, Role};
use crate::defenses::{MidLayer, MidTape};
use crate::error::{Error, Result};
use crate::numeric::{ForwardTape, Matrix, MlpModel};

pub struct Party {
    pub id: usize,
    pub role: Role,
    pub view: PartyView,
    pub model: MlpModel,
    /// MID bottleneck with its regularizer weight, when that defense is on.
    pub mid: Option<(MidLayer, f64)>,
}

pub struct PartyTape {
    pub inputs: Matrix,
    pub model_tape: ForwardTape,
    pub mid_tape: Option<MidTape>,
}

impl Party {
    pub fn new(view: PartyView, model: MlpModel) -> Result<Self> {
        if view.features.cols() != model.input_dim() {
            return Err(Error::Config(format!(
                "party {}: view has {} features, model expects {}",
                view.party,
                view.features.cols(),
                model.input_dim()
            )));
        }
        if view.role == Role::Passive && view.labels.is_some() {
            return Err(Error::Config("passive view must not carry labels".into()));
        }
        Ok(Self {
            id: view.party,
            role: view.role,
            view,
            model,
            mid: None,
        })
    }

    pub fn with_mid(mut self, layer: MidLayer, lambda: f64) -> Result<Self> {
        if layer.dim() != self.model.output_dim() {
            return Err(Error::Config("MID bottleneck dim must equal embedding dim".into()));
        }
        self.mid = Some((layer, lambda));
        Ok(self)
    }

    pub fn embedding_dim(&self) -> usize {
        self.model.output_dim()
    }

    /// Forward explicit feature rows through the local stack. `rng` drives
    /// the MID sampling; None uses the deterministic bottleneck mean.
    pub fn forward_rows(
        &self,
        rows: &Matrix,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Matrix, PartyTape)> {
        let (h, model_tape) = self.model.forward(rows)?;
        match (&self.mid, rng) {
            (Some((layer, _)), Some(rng)) => {
                let (out, mid_tape) = layer.forward(&h, rng)?;
                Ok((
                    out,
                    PartyTape {
                        inputs: rows.clone(),
                        model_tape,
                        mid_tape: Some(mid_tape),
                    },
                ))
            }
            (Some((layer, _)), None) => {
                let out = layer.forward_mean(&h)?;
                // mean-mode tape is not used for updates
                Ok((
                    out,
                    PartyTape {
                        inputs: rows.clone(),
                        model_tape,
                        mid_tape: None,
                    },
                ))
            }
            (None, _) => Ok((
                h,
                PartyTape {
                    inputs: rows.clone(),
                    model_tape,
                    mid_tape: None,
                },
            )),
        }
    }

    /// Forward a training batch by sample index.
    pub fn forward_batch(
        &self,
        batch: &[usize],
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Matrix, PartyTape)> {
        let rows = self.view.features.select_rows(batch);
        self.forward_rows(&rows, rng)
    }

    /// One local SGD step from the mean-scale gradient at the top of the
    /// party stack (∂L/∂H at batch-mean scale). `param_scale` multiplies the
    /// local-model parameter gradients (the malicious-optimizer hook).
    pub fn local_update(
        &mut self,
        tape: &PartyTape,
        top_grad_mean: &Matrix,
        lr: f64,
        param_scale: f64,
    ) -> Result<()> {
        let n = top_grad_mean.rows() as f64;
        let model_out_grad = match (&self.mid, &tape.mid_tape) {
            (Some((layer, lambda)), Some(mid_tape)) => {
                let (enc_g, dec_g, dh) = layer.backward(mid_tape, top_grad_mean, lambda / n)?;
                let (layer_mut, _) = self.mid.as_mut().unwrap();
                layer_mut.sgd_update(&enc_g, &dec_g, lr)?;
                dh
            }
            (Some(_), None) => {
                return Err(Error::Usage("MID party updated from a mean-mode tape".into()));
            }
            (None, _) => top_grad_mean.clone(),
        };
        let (mut grads, _) = self.model.backward(&tape.model_tape, &model_out_grad)?;
        if param_scale != 1.0 {
            grads.scale(param_scale);
        }
        self.model.sgd_update(&grads, lr)
    }
}
