//! Additively homomorphic Paillier cryptosystem (g = n+1 variant) plus the
//! HE-protected logistic training protocol with Taylor-approximated
//! gradients and TTP masked decryption.

mod codec;
mod he_lr;
mod keys;

pub use codec::FixedPointCodec;
pub use he_lr::{
    masked_decrypt_round, plaintext_taylor_logistic, taylor_logit_grad, train_he_logistic,
    HeLogisticConfig, HeTrainedModel, Ttp,
};
pub use keys::{keygen, Ciphertext, PaillierPrivateKey, PaillierPublicKey};
