//! The training loop: one exchange per round (embeddings up, per-sample
//! gradients down), Q local steps per exchange under FedBCD, defense hooks
//! at the documented sites, and per-round byte accounting.
//!
//! Wire convention: the transmitted per-sample gradient tensor is the
//! unreduced (softmax − target) rows; parties apply the 1/batch mean factor
//! when forming parameter gradients. Gradient-observing attacks therefore
//! see exactly the unreduced rows, post-defense.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Role;
use crate::defenses::{
    dcor_log_penalty, dp_noise_embedding, dp_noise_gradient, grad_discretize, grad_perturb,
    grad_sparsify, DefensePlan, EmbedUpOp, GradDownOp,
};
use crate::error::{Error, Result};
use crate::numeric::{softmax_rows, Matrix};
use crate::vfl::{
    account_bytes, quantize_embedding, topk_sparsify, CommLedger, Direction, GlobalHead, Party,
    PartyTape, ProtocolConfig, TrainConfig,
};

/// Which epoch's attacker observations are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordEpoch {
    First,
    Last,
}

#[derive(Debug, Clone)]
pub struct RecordingConfig {
    /// Observing passive party.
    pub attacker: usize,
    pub epoch: RecordEpoch,
    /// Also keep per-batch records (embeddings + summed gradients).
    pub batch_level: bool,
}

impl Default for RecordingConfig {
    fn default() -> Self {
        Self {
            attacker: 0,
            epoch: RecordEpoch::Last,
            batch_level: false,
        }
    }
}

/// Per-sample gradients observed by the attacker during the recorded epoch.
#[derive(Debug, Clone)]
pub struct SampleGrads {
    pub ids: Vec<usize>,
    pub rows: Matrix,
}

/// One batch as the attacker saw it: sample ids, its own transmitted
/// embedding rows, and the batch-summed downward gradient.
#[derive(Debug, Clone)]
pub struct BatchRecord {
    pub ids: Vec<usize>,
    pub h_own: Matrix,
    pub grad_sum: Vec<f64>,
}

/// Everything an attack may later observe from a finished run.
#[derive(Debug, Clone, Default)]
pub struct RunObservations {
    pub attacker: usize,
    pub sample_grads: Option<SampleGrads>,
    pub batch_records: Vec<BatchRecord>,
    pub recorded_epoch: usize,
}

/// Trigger pattern on the attacker's feature block.
#[derive(Debug, Clone)]
pub struct Trigger {
    pub feature_idx: Vec<usize>,
    pub value: f64,
}

impl Trigger {
    pub fn apply(&self, row: &mut [f64]) {
        for &i in &self.feature_idx {
            row[i] = self.value;
        }
    }
}

/// Label-replacement backdoor: during training the attacker transmits a
/// triggered poison sample's embedding at the position of a known clean
/// target-class sample. The batch sampler is seeded so the clean sample is
/// co-scheduled into every batch.
#[derive(Debug, Clone)]
pub struct LrbPlan {
    pub attacker: usize,
    pub target_class: u32,
    pub clean_sample: usize,
    pub poison_samples: Vec<usize>,
    pub trigger: Trigger,
}

/// Active model completion: the attacker's malicious optimizer scales its
/// local parameter gradients up when its loss proxy (the epoch-mean norm of
/// received gradients) stalls.
#[derive(Debug, Clone)]
pub struct AmcPlan {
    pub attacker: usize,
    pub scale: f64,
}

/// Test features per party plus the evaluation labels (held by the
/// simulation harness, not a party).
pub struct TestSet {
    pub party_features: Vec<Matrix>,
    pub labels: Vec<u32>,
}

/// Inference-time tampering by a passive attacker.
pub enum InferenceTamper<'a> {
    None,
    /// Gaussian noise added to the attacker's raw features of the selected
    /// test rows before the local forward.
    NoisyFeatures {
        party: usize,
        rows: &'a [usize],
        noise_std: f64,
        seed: u64,
    },
    /// The attacker's transmitted embedding rows zeroed for the selected
    /// test rows.
    MissingEmbedding { party: usize, rows: &'a [usize] },
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// (exchange index, test MP) probes.
    pub mp_history: Vec<(u64, f64)>,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub final_mp: f64,
    pub stopped_early: bool,
    pub exchanges_per_epoch: usize,
}

/// Read-only prediction/gradient oracle handed to black-box attacks; it
/// exposes query results, never model parameters.
pub struct QueryHandle<'a> {
    parties: &'a [Party],
    head: &'a GlobalHead,
}

impl<'a> QueryHandle<'a> {
    /// Federation class probabilities for explicit per-party feature rows.
    pub fn predict_probs(&self, features: &[Matrix]) -> Result<Matrix> {
        let mut embeds = Vec::with_capacity(self.parties.len());
        for (party, rows) in self.parties.iter().zip(features) {
            let (h, _) = party.forward_rows(rows, None)?;
            embeds.push(h);
        }
        let (logits, _) = self.head.forward(&embeds)?;
        Ok(softmax_rows(&logits))
    }

    /// Gradient of a loss on the logits with respect to one party's input
    /// features (an honest query response; parameters stay hidden). MID
    /// parties answer through the deterministic bottleneck mean.
    pub fn grad_wrt_party_input(
        &self,
        party: usize,
        features: &[Matrix],
        dlogits: &Matrix,
    ) -> Result<Matrix> {
        let mut embeds = Vec::with_capacity(self.parties.len());
        for (p, rows) in self.parties.iter().zip(features) {
            let (h, _) = p.forward_rows(rows, None)?;
            embeds.push(h);
        }
        let target = &self.parties[party];
        let (h_model, model_tape) = target.model.forward(&features[party])?;
        let mid_pass = match &target.mid {
            Some((layer, _)) => {
                let eps = Matrix::zeros(h_model.rows(), layer.dim());
                let (out, tape) = layer.forward_with_eps(&h_model, eps)?;
                embeds[party] = out;
                Some(tape)
            }
            None => {
                embeds[party] = h_model.clone();
                None
            }
        };
        let (_, head_tape) = self.head.forward(&embeds)?;
        let (blocks, _) = self.head.backward(&head_tape, dlogits)?;
        let model_out_grad = match (&target.mid, &mid_pass) {
            (Some((layer, _)), Some(tape)) => layer.backward(tape, &blocks[party], 0.0)?.2,
            _ => blocks[party].clone(),
        };
        let (_, input_grad) = target.model.backward(&model_tape, &model_out_grad)?;
        Ok(input_grad)
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }
}

pub struct Trainer {
    parties: Vec<Party>,
    head: GlobalHead,
    protocol: ProtocolConfig,
    cfg: TrainConfig,
    plan: DefensePlan,
    recording: RecordingConfig,
    lrb: Option<LrbPlan>,
    amc: Option<AmcPlan>,
    pub ledger: CommLedger,
    pub obs: RunObservations,
    classes: usize,
    active: usize,
    exchanges: u64,
    amc_prev_norm: Option<f64>,
    amc_acc: f64,
    amc_count: usize,
    amc_active_scale: f64,
    lrb_poison_cursor: usize,
}

impl Trainer {
    pub fn new(
        parties: Vec<Party>,
        head: GlobalHead,
        protocol: ProtocolConfig,
        cfg: TrainConfig,
        plan: DefensePlan,
        classes: usize,
    ) -> Result<Self> {
        protocol.validate()?;
        cfg.validate()?;
        if parties.is_empty() {
            return Err(Error::Config("at least one party required".into()));
        }
        let active_parties: Vec<usize> = parties
            .iter()
            .enumerate()
            .filter(|(_, p)| p.role == Role::Active)
            .map(|(i, _)| i)
            .collect();
        if active_parties.len() != 1 {
            return Err(Error::Config("exactly one active party required".into()));
        }
        let active = active_parties[0];
        if parties[active].view.labels.is_none() {
            return Err(Error::Config("active party carries no labels".into()));
        }
        let dims: Vec<usize> = parties.iter().map(|p| p.embedding_dim()).collect();
        head.validate(&dims, classes)?;
        let n = parties[0].view.features.rows();
        if parties.iter().any(|p| p.view.features.rows() != n) {
            return Err(Error::Config("parties disagree on the sample count".into()));
        }
        Ok(Self {
            parties,
            head,
            protocol,
            cfg,
            plan,
            recording: RecordingConfig::default(),
            lrb: None,
            amc: None,
            ledger: CommLedger::default(),
            obs: RunObservations::default(),
            classes,
            active,
            exchanges: 0,
            amc_prev_norm: None,
            amc_acc: 0.0,
            amc_count: 0,
            amc_active_scale: 1.0,
            lrb_poison_cursor: 0,
        })
    }

    pub fn with_recording(mut self, recording: RecordingConfig) -> Self {
        self.recording = recording;
        self
    }

    pub fn with_lrb(mut self, plan: LrbPlan) -> Self {
        self.lrb = Some(plan);
        self
    }

    pub fn with_amc(mut self, plan: AmcPlan) -> Self {
        self.amc = Some(plan);
        self
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    /// Mutable party access for training-time attack hooks and fault
    /// injection in tests.
    pub fn parties_mut(&mut self) -> &mut [Party] {
        &mut self.parties
    }

    pub fn active_party(&self) -> usize {
        self.active
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn head(&self) -> &GlobalHead {
        &self.head
    }

    pub fn exchanges(&self) -> u64 {
        self.exchanges
    }

    pub fn plan(&self) -> &DefensePlan {
        &self.plan
    }

    pub fn query_handle(&self) -> QueryHandle<'_> {
        QueryHandle {
            parties: &self.parties,
            head: &self.head,
        }
    }

    fn stream_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }

    /// The seeded stream used to initialize party `id`'s local model; setup
    /// code uses this so runs replay.
    pub fn party_init_rng(seed: u64, id: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(100 + id as u64);
        rng
    }

    /// Run the training loop; probes test MP every `eval_every` exchanges
    /// (or at each epoch end).
    pub fn train(&mut self, test: &TestSet) -> Result<TrainReport> {
        let n = self.parties[0].view.features.rows();
        let batches_per_epoch = n.div_ceil(self.cfg.batch_size);
        let mut defense_rng = self.stream_rng(200);
        let mut mid_rngs: Vec<ChaCha8Rng> = (0..self.parties.len())
            .map(|p| self.stream_rng(300 + p as u64))
            .collect();

        let mut mp_history: Vec<(u64, f64)> = Vec::new();
        let mut epoch_losses = Vec::with_capacity(self.cfg.epochs);
        let mut stopped_early = false;

        'epochs: for epoch in 0..self.cfg.epochs {
            let record_this_epoch = match self.recording.epoch {
                RecordEpoch::First => epoch == 0,
                RecordEpoch::Last => true, // rolling reset; the last epoch's records survive
            };
            if record_this_epoch {
                self.obs = RunObservations {
                    attacker: self.recording.attacker,
                    sample_grads: None,
                    batch_records: Vec::new(),
                    recorded_epoch: epoch,
                };
            }
            let mut grad_ids: Vec<usize> = Vec::new();
            let mut grad_rows: Vec<f64> = Vec::new();

            let mut batches =
                crate::data::batch_iter(n, self.cfg.batch_size, self.cfg.seed, epoch as u64);
            if let Some(lrb) = &self.lrb {
                let clean = lrb.clean_sample;
                for batch in batches.iter_mut() {
                    if !batch.contains(&clean) {
                        batch[0] = clean;
                    }
                }
            }

            let mut loss_acc = 0.0;
            for batch in &batches {
                let loss = self.exchange_round(
                    batch,
                    &mut defense_rng,
                    &mut mid_rngs,
                    record_this_epoch,
                    &mut grad_ids,
                    &mut grad_rows,
                )?;
                loss_acc += loss;
                self.exchanges += 1;

                if let Some(every) = self.cfg.eval_every {
                    if self.exchanges % every as u64 == 0 {
                        let mp = self.evaluate(test, &InferenceTamper::None)?;
                        mp_history.push((self.exchanges, mp));
                        if matches!(self.cfg.target_mp, Some(t) if mp >= t) {
                            stopped_early = true;
                            break;
                        }
                    }
                }
            }
            epoch_losses.push(loss_acc / batches.len() as f64);

            if record_this_epoch && !grad_ids.is_empty() {
                let cols = grad_rows.len() / grad_ids.len();
                self.obs.sample_grads = Some(SampleGrads {
                    rows: Matrix::from_vec(grad_ids.len(), cols, grad_rows)?,
                    ids: grad_ids,
                });
            }

            if stopped_early {
                break 'epochs;
            }

            if self.cfg.eval_every.is_none() {
                let mp = self.evaluate(test, &InferenceTamper::None)?;
                mp_history.push((self.exchanges, mp));
                if matches!(self.cfg.target_mp, Some(t) if mp >= t) {
                    break 'epochs;
                }
            }

            // AMC loss proxy update at epoch boundaries
            if let Some(amc) = &self.amc {
                if self.amc_count > 0 {
                    let mean = self.amc_acc / self.amc_count as f64;
                    if let Some(prev) = self.amc_prev_norm {
                        self.amc_active_scale = if mean >= prev { amc.scale } else { 1.0 };
                    }
                    self.amc_prev_norm = Some(mean);
                    self.amc_acc = 0.0;
                    self.amc_count = 0;
                }
            }
        }

        let final_mp = match mp_history.last() {
            Some(&(_, mp)) => mp,
            None => self.evaluate(test, &InferenceTamper::None)?,
        };
        Ok(TrainReport {
            mp_history,
            epoch_losses,
            final_mp,
            stopped_early,
            exchanges_per_epoch: batches_per_epoch,
        })
    }

    /// One communication exchange plus Q local steps.
    fn exchange_round(
        &mut self,
        batch: &[usize],
        defense_rng: &mut ChaCha8Rng,
        mid_rngs: &mut [ChaCha8Rng],
        record: bool,
        grad_ids: &mut Vec<usize>,
        grad_rows: &mut Vec<f64>,
    ) -> Result<f64> {
        let bsz = batch.len();
        let active = self.active;
        let labels = self.parties[active]
            .view
            .labels
            .as_ref()
            .expect("validated at construction")
            .gather(batch);

        // fresh forward at every party
        let mut own_embeds: Vec<Matrix> = Vec::with_capacity(self.parties.len());
        let mut tapes: Vec<PartyTape> = Vec::with_capacity(self.parties.len());
        for p in 0..self.parties.len() {
            let (h, tape) = self.parties[p].forward_batch(batch, Some(&mut mid_rngs[p]))?;
            own_embeds.push(h);
            tapes.push(tape);
        }

        // label-replacement backdoor swap on the attacker's payload
        if let Some(lrb) = self.lrb.clone() {
            let has_poison = batch.iter().any(|i| lrb.poison_samples.contains(i));
            if has_poison {
                if let Some(pos) = batch.iter().position(|&i| i == lrb.clean_sample) {
                    let poison_id =
                        lrb.poison_samples[self.lrb_poison_cursor % lrb.poison_samples.len()];
                    self.lrb_poison_cursor += 1;
                    let mut row = self.parties[lrb.attacker]
                        .view
                        .features
                        .select_rows(&[poison_id]);
                    lrb.trigger.apply(row.row_mut(0));
                    let (h_poison, _) = self.parties[lrb.attacker]
                        .forward_rows(&row, Some(&mut mid_rngs[lrb.attacker]))?;
                    own_embeds[lrb.attacker]
                        .row_mut(pos)
                        .copy_from_slice(h_poison.row(0));
                }
            }
        }

        // upward wire: defense then compression, passive parties only
        let mut wire_embeds = own_embeds.clone();
        let mut up_bytes = 0u64;
        for p in 0..self.parties.len() {
            if p == active {
                continue;
            }
            if let Some(EmbedUpOp::NormalizeNoise { kind, scale }) = self.plan.embed_up {
                wire_embeds[p] = dp_noise_embedding(&wire_embeds[p], kind, scale, defense_rng);
            }
            let (wire, bytes) = match self.protocol {
                ProtocolConfig::Quantize { b } => quantize_embedding(&wire_embeds[p], b)?,
                ProtocolConfig::TopK { r } => topk_sparsify(&wire_embeds[p], r)?,
                _ => {
                    let bytes =
                        account_bytes(&self.protocol, bsz, wire_embeds[p].cols(), Direction::Up);
                    (wire_embeds[p].clone(), bytes)
                }
            };
            wire_embeds[p] = wire;
            up_bytes += bytes;
        }

        // active side: loss and the unreduced per-sample logit gradient
        let (logits, head_tape) = self.head.forward(&wire_embeds)?;
        if !logits.all_finite() {
            return Err(Error::Numeric(format!(
                "non-finite logits at exchange {}; run aborted",
                self.exchanges
            )));
        }
        let targets = match &self.plan.cae {
            Some(codec) => codec.apply(&labels),
            None => onehot(&labels, self.classes, bsz),
        };
        let (loss, dlogits_mean) = crate::numeric::softmax_cross_entropy_soft(&logits, &targets)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "loss became non-finite at exchange {}",
                self.exchanges
            )));
        }
        let mut dlogits = dlogits_mean;
        dlogits.scale(bsz as f64);

        let (mut party_grads, head_grads) = self.head.backward(&head_tape, &dlogits)?;

        // active-side dCor regularizer: penalize dependence between every
        // transmitted embedding and the true labels
        if let Some(alpha) = self.plan.dcor_active {
            let targets_y = onehot(&labels, self.classes, bsz);
            for p in 0..self.parties.len() {
                if let Some((_, pen_grad)) = dcor_log_penalty(&wire_embeds[p], &targets_y, alpha)? {
                    let mut scaled = pen_grad;
                    scaled.scale(bsz as f64);
                    party_grads[p].add_assign(&scaled)?;
                }
            }
        }

        // downward wire: gradient defenses for passive parties
        let mut down_bytes = 0u64;
        for p in 0..self.parties.len() {
            if p == active {
                continue;
            }
            if let Some(op) = self.plan.grad_down {
                party_grads[p] = match op {
                    GradDownOp::ClipNoise { kind, scale } => {
                        dp_noise_gradient(&party_grads[p], kind, scale, defense_rng)
                    }
                    GradDownOp::Sparsify { rate_percent } => {
                        grad_sparsify(&party_grads[p], rate_percent)
                    }
                    GradDownOp::Perturb { scale } => {
                        grad_perturb(&party_grads[p], &labels, self.classes, scale, defense_rng)?
                    }
                    GradDownOp::Discretize { bins } => grad_discretize(&party_grads[p], bins),
                };
            }
            down_bytes += account_bytes(&self.protocol, bsz, party_grads[p].cols(), Direction::Down);
        }
        self.ledger.record_round(up_bytes, down_bytes);

        // attacker observations (post-defense wire values)
        if record {
            let a = self.recording.attacker;
            if a != active {
                grad_ids.extend_from_slice(batch);
                grad_rows.extend_from_slice(party_grads[a].data());
                if self.recording.batch_level {
                    let g = &party_grads[a];
                    let mut grad_sum = vec![0.0; g.cols()];
                    for r in 0..g.rows() {
                        for (s, v) in grad_sum.iter_mut().zip(g.row(r)) {
                            *s += v;
                        }
                    }
                    self.obs.batch_records.push(BatchRecord {
                        ids: batch.to_vec(),
                        h_own: wire_embeds[a].clone(),
                        grad_sum,
                    });
                }
            }
        }
        if let Some(amc) = &self.amc {
            let g = &party_grads[amc.attacker];
            let mut acc = 0.0;
            for r in 0..g.rows() {
                acc += g.row(r).iter().map(|v| v * v).sum::<f64>().sqrt();
            }
            self.amc_acc += acc / g.rows() as f64;
            self.amc_count += 1;
        }

        // local updates: Q steps per exchange, stale wire gradients
        let q_steps = self.protocol.local_steps();
        let inv_n = 1.0 / bsz as f64;
        for q in 0..q_steps {
            for p in 0..self.parties.len() {
                if p == active {
                    continue;
                }
                if q > 0 {
                    let (h, t) = self.parties[p].forward_batch(batch, Some(&mut mid_rngs[p]))?;
                    own_embeds[p] = h;
                    tapes[p] = t;
                }
                let mut top = party_grads[p].clone();
                top.scale(inv_n);
                if let Some(alpha) = self.plan.dcor_passive {
                    let x_batch = self.parties[p].view.features.select_rows(batch);
                    if let Some((_, pen)) = dcor_log_penalty(&own_embeds[p], &x_batch, alpha)? {
                        top.add_assign(&pen)?;
                    }
                }
                let scale = match &self.amc {
                    Some(amc) if amc.attacker == p => self.amc_active_scale,
                    _ => 1.0,
                };
                self.parties[p].local_update(&tapes[p], &top, self.cfg.lr_local, scale)?;
            }

            if q == 0 {
                if let Some(hg) = &head_grads {
                    let mut scaled = hg.clone();
                    scaled.scale(inv_n);
                    self.head.sgd_update(&scaled, self.cfg.lr_global)?;
                }
                let mut top = party_grads[active].clone();
                top.scale(inv_n);
                self.parties[active].local_update(&tapes[active], &top, self.cfg.lr_local, 1.0)?;
            } else {
                // fresh own pass against the stale peer wire embeddings
                let (h_own, tape) =
                    self.parties[active].forward_batch(batch, Some(&mut mid_rngs[active]))?;
                let mut current = wire_embeds.clone();
                current[active] = h_own;
                let (logits_q, head_tape_q) = self.head.forward(&current)?;
                let (_, dlog_mean) =
                    crate::numeric::softmax_cross_entropy_soft(&logits_q, &targets)?;
                let mut dlog = dlog_mean;
                dlog.scale(bsz as f64);
                let (blocks, hg) = self.head.backward(&head_tape_q, &dlog)?;
                if let Some(mut hg) = hg {
                    hg.scale(inv_n);
                    self.head.sgd_update(&hg, self.cfg.lr_global)?;
                }
                let mut top = blocks[active].clone();
                top.scale(inv_n);
                self.parties[active].local_update(&tape, &top, self.cfg.lr_local, 1.0)?;
            }
        }

        Ok(loss)
    }

    /// Federation class probabilities for per-party test features.
    pub fn predict_probs(
        &self,
        party_features: &[Matrix],
        tamper: &InferenceTamper<'_>,
    ) -> Result<Matrix> {
        if party_features.len() != self.parties.len() {
            return Err(Error::Config("feature list does not match party count".into()));
        }
        let mut embeds = Vec::with_capacity(self.parties.len());
        for (p, party) in self.parties.iter().enumerate() {
            let mut rows = party_features[p].clone();
            if let InferenceTamper::NoisyFeatures {
                party: tp,
                rows: sel,
                noise_std,
                seed,
            } = tamper
            {
                if *tp == p {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let normal =
                        Normal::new(0.0, *noise_std).map_err(|e| Error::Config(e.to_string()))?;
                    for &r in *sel {
                        for v in rows.row_mut(r) {
                            *v += normal.sample(&mut rng);
                        }
                    }
                }
            }
            let (mut h, _) = party.forward_rows(&rows, None)?;
            if let InferenceTamper::MissingEmbedding { party: tp, rows: sel } = tamper {
                if *tp == p {
                    for &r in *sel {
                        for v in h.row_mut(r) {
                            *v = 0.0;
                        }
                    }
                }
            }
            embeds.push(h);
        }
        let (logits, _) = self.head.forward(&embeds)?;
        Ok(softmax_rows(&logits))
    }

    /// Class predictions, recovering through the CAE decoder when that
    /// defense is installed.
    pub fn predict_labels(
        &self,
        party_features: &[Matrix],
        tamper: &InferenceTamper<'_>,
    ) -> Result<Vec<u32>> {
        let probs = self.predict_probs(party_features, tamper)?;
        match &self.plan.cae {
            Some(codec) => codec.recover(&probs),
            None => Ok(argmax_rows(&probs)),
        }
    }

    /// Argmax-match fraction on the test set.
    pub fn evaluate(&self, test: &TestSet, tamper: &InferenceTamper<'_>) -> Result<f64> {
        let preds = self.predict_labels(&test.party_features, tamper)?;
        let correct = preds
            .iter()
            .zip(&test.labels)
            .filter(|(a, b)| a == b)
            .count();
        Ok(correct as f64 / test.labels.len().max(1) as f64)
    }

    /// MP restricted to a subset of test rows.
    pub fn evaluate_rows(
        &self,
        test: &TestSet,
        rows: &[usize],
        tamper: &InferenceTamper<'_>,
    ) -> Result<f64> {
        let preds = self.predict_labels(&test.party_features, tamper)?;
        let correct = rows.iter().filter(|&&r| preds[r] == test.labels[r]).count();
        Ok(correct as f64 / rows.len().max(1) as f64)
    }
}

fn onehot(labels: &[u32], classes: usize, rows: usize) -> Matrix {
    let mut t = Matrix::zeros(rows, classes);
    for (r, &y) in labels.iter().enumerate() {
        t.set(r, y as usize, 1.0);
    }
    t
}

pub(crate) fn argmax_rows(m: &Matrix) -> Vec<u32> {
    let mut out = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let row = m.row(r);
        let mut best = 0usize;
        for j in 1..row.len() {
            if row[j] > row[best] {
                best = j;
            }
        }
        out.push(best as u32);
    }
    out
}
