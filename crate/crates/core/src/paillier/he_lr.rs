//! HE-protected VFL training for logistic local models: passive parties
//! encrypt their partial margins, the active party forms the encrypted
//! Taylor-approximated gradient (σ(z) ≈ ½ + z/4), and parties obtain their
//! parameter gradients through TTP masked decryption.

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::paillier::{keygen, Ciphertext, FixedPointCodec, PaillierPrivateKey, PaillierPublicKey};

/// Trusted third party: generates keys, keeps the private key, and serves
/// decryption requests (it only ever sees masked residues in the protocol).
pub struct Ttp {
    sk: PaillierPrivateKey,
}

impl Ttp {
    pub fn setup<R: Rng>(bits: u64, rng: &mut R) -> Result<(Self, PaillierPublicKey)> {
        let (pk, sk) = keygen(bits, rng)?;
        Ok((Self { sk }, pk))
    }

    /// The decryption oracle. Protocol parties call it only through
    /// [`masked_decrypt_round`].
    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint> {
        self.sk.decrypt(c)
    }
}

/// Party-side masked decryption: add a uniform random mask homomorphically,
/// let the TTP decrypt, subtract the mask. The TTP observes only the masked
/// residue.
pub fn masked_decrypt_round<R: Rng>(
    c: &Ciphertext,
    pk: &PaillierPublicKey,
    ttp: &Ttp,
    rng: &mut R,
) -> Result<BigUint> {
    let mask = rng.gen_biguint_below(&pk.n);
    let masked = pk.he_add_plain(c, &mask)?;
    let observed = ttp.decrypt(&masked)?;
    Ok((observed + &pk.n - mask) % &pk.n)
}

/// Encrypted per-sample gradient of the logistic loss with respect to the
/// margin, first-order Taylor at 0: g = ¼·z + ½ − y. The margin ciphertext
/// carries one codec scale; the result carries two.
pub fn enc_taylor_margin_grad(
    pk: &PaillierPublicKey,
    codec: &FixedPointCodec,
    enc_margin: &Ciphertext,
    y: u32,
) -> Result<Ciphertext> {
    let quarter = codec.encode(0.25, pk)?;
    let scaled = pk.he_scalar_mul(&quarter, enc_margin)?;
    let constant = codec.encode_with_total_bits(0.5 - y as f64, 2 * codec.scale_bits, pk)?;
    pk.he_add_plain(&scaled, &constant)
}

/// Encrypted gradient contribution (¼z + ½ − y)·x for one sample: one
/// ciphertext per feature, at three codec scales.
pub fn taylor_logit_grad(
    pk: &PaillierPublicKey,
    codec: &FixedPointCodec,
    enc_margin: &Ciphertext,
    x_row: &[f64],
    y: u32,
) -> Result<Vec<Ciphertext>> {
    let g = enc_taylor_margin_grad(pk, codec, enc_margin, y)?;
    x_row
        .iter()
        .map(|&x| {
            let k = codec.encode(x, pk)?;
            pk.he_scalar_mul(&k, &g)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct HeLogisticConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub key_bits: u64,
    pub seed: u64,
    pub scale_bits: u32,
}

impl Default for HeLogisticConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 64,
            lr: 0.5,
            key_bits: 512,
            seed: 0,
            scale_bits: 40,
        }
    }
}

/// A trained federated logistic model: one weight vector per party plus the
/// active party's bias. Binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct HeTrainedModel {
    pub weights: Vec<Vec<f64>>,
    pub bias: f64,
}

impl HeTrainedModel {
    pub fn margins(&self, party_features: &[Matrix]) -> Vec<f64> {
        let n = party_features[0].rows();
        let mut z = vec![self.bias; n];
        for (w, x) in self.weights.iter().zip(party_features) {
            for (zi, r) in z.iter_mut().zip(0..n) {
                let row = x.row(r);
                *zi += row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        z
    }

    pub fn predict(&self, party_features: &[Matrix]) -> Vec<u32> {
        self.margins(party_features)
            .into_iter()
            .map(|z| u32::from(z > 0.0))
            .collect()
    }

    pub fn accuracy(&self, party_features: &[Matrix], labels: &[u32]) -> f64 {
        let preds = self.predict(party_features);
        preds.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
    }
}

fn validate_binary(labels: &[u32]) -> Result<()> {
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::Config("HE logistic training is binary".into()));
    }
    Ok(())
}

/// The HE-protected training loop (the last party is active and holds the
/// labels and bias). Weights start at zero so the plaintext reference run
/// is bit-comparable.
pub fn train_he_logistic(
    party_features: &[Matrix],
    labels: &[u32],
    cfg: &HeLogisticConfig,
) -> Result<HeTrainedModel> {
    validate_binary(labels)?;
    let n = party_features[0].rows();
    if party_features.iter().any(|m| m.rows() != n) || labels.len() != n {
        return Err(Error::Config("misaligned HE training inputs".into()));
    }
    let codec = FixedPointCodec::new(cfg.scale_bits);
    let mut key_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (ttp, pk) = Ttp::setup(cfg.key_bits, &mut key_rng)?;
    let mut enc_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    enc_rng.set_stream(1);

    let parties = party_features.len();
    let active = parties - 1;
    let mut weights: Vec<Vec<f64>> = party_features
        .iter()
        .map(|m| vec![0.0; m.cols()])
        .collect();
    let mut bias = 0.0f64;

    for epoch in 0..cfg.epochs {
        for batch in crate::data::batch_iter(n, cfg.batch_size, cfg.seed, epoch as u64) {
            let bsz = batch.len();
            // local partial margins
            let h: Vec<Vec<f64>> = (0..parties)
                .map(|p| {
                    batch
                        .iter()
                        .map(|&i| {
                            party_features[p]
                                .row(i)
                                .iter()
                                .zip(&weights[p])
                                .map(|(a, b)| a * b)
                                .sum::<f64>()
                        })
                        .collect()
                })
                .collect();

            // passive parties encrypt and send [[H_k]]; the active party
            // aggregates and folds in its own margin plus bias in plaintext
            let mut enc_z: Vec<Ciphertext> = Vec::with_capacity(bsz);
            for (row, _) in batch.iter().enumerate() {
                let mut acc: Option<Ciphertext> = None;
                for (p, h_p) in h.iter().enumerate() {
                    if p == active {
                        continue;
                    }
                    let enc = pk.encrypt(&codec.encode(h_p[row], &pk)?, &mut enc_rng)?;
                    acc = Some(match acc {
                        None => enc,
                        Some(prev) => pk.he_add(&prev, &enc)?,
                    });
                }
                let own = codec.encode(h[active][row] + bias, &pk)?;
                let combined = match acc {
                    Some(c) => pk.he_add_plain(&c, &own)?,
                    None => pk.encrypt(&own, &mut enc_rng)?,
                };
                enc_z.push(combined);
            }

            // encrypted Taylor gradient per sample (two codec scales)
            let batch_labels: Vec<u32> = batch.iter().map(|&i| labels[i]).collect();
            let enc_g: Vec<Ciphertext> = enc_z
                .iter()
                .zip(&batch_labels)
                .map(|(z, &y)| enc_taylor_margin_grad(&pk, &codec, z, y))
                .collect::<Result<_>>()?;

            // each party aggregates its encrypted feature gradients and
            // unmasks them through the TTP
            let inv_n = 1.0 / bsz as f64;
            for p in 0..parties {
                let cols = party_features[p].cols();
                for j in 0..cols {
                    let mut acc = pk.zero();
                    for (row, &i) in batch.iter().enumerate() {
                        let x = party_features[p].get(i, j);
                        let k = codec.encode(x, &pk)?;
                        let term = pk.he_scalar_mul(&k, &enc_g[row])?;
                        acc = pk.he_add(&acc, &term)?;
                    }
                    let plain = masked_decrypt_round(&acc, &pk, &ttp, &mut enc_rng)?;
                    let grad = codec.decode_with_scale(&plain, 3 * cfg.scale_bits, &pk) * inv_n;
                    weights[p][j] -= cfg.lr * grad;
                }
            }
            // active party's bias gradient: Σ g_i at two scales
            let mut acc = pk.zero();
            for g in &enc_g {
                acc = pk.he_add(&acc, g)?;
            }
            let plain = masked_decrypt_round(&acc, &pk, &ttp, &mut enc_rng)?;
            bias -= cfg.lr * codec.decode_with_scale(&plain, 2 * cfg.scale_bits, &pk) * inv_n;
        }
    }
    Ok(HeTrainedModel { weights, bias })
}

/// The plaintext reference: identical loop and update order, f64 Taylor
/// gradients, no encryption.
pub fn plaintext_taylor_logistic(
    party_features: &[Matrix],
    labels: &[u32],
    cfg: &HeLogisticConfig,
) -> Result<HeTrainedModel> {
    validate_binary(labels)?;
    let n = party_features[0].rows();
    if party_features.iter().any(|m| m.rows() != n) || labels.len() != n {
        return Err(Error::Config("misaligned training inputs".into()));
    }
    let mut weights: Vec<Vec<f64>> = party_features
        .iter()
        .map(|m| vec![0.0; m.cols()])
        .collect();
    let mut bias = 0.0f64;

    for epoch in 0..cfg.epochs {
        for batch in crate::data::batch_iter(n, cfg.batch_size, cfg.seed, epoch as u64) {
            let bsz = batch.len();
            let mut z = vec![bias; bsz];
            for (p, w) in weights.iter().enumerate() {
                for (row, &i) in batch.iter().enumerate() {
                    z[row] += party_features[p]
                        .row(i)
                        .iter()
                        .zip(w)
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                }
            }
            let g: Vec<f64> = batch
                .iter()
                .zip(&z)
                .map(|(&i, &zi)| 0.25 * zi + 0.5 - labels[i] as f64)
                .collect();
            let inv_n = 1.0 / bsz as f64;
            for (p, w) in weights.iter_mut().enumerate() {
                for (j, wj) in w.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (row, &i) in batch.iter().enumerate() {
                        acc += party_features[p].get(i, j) * g[row];
                    }
                    *wj -= cfg.lr * acc * inv_n;
                }
            }
            bias -= cfg.lr * g.iter().sum::<f64>() * inv_n;
        }
    }
    Ok(HeTrainedModel { weights, bias })
}
