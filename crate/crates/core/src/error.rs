//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model/experiment wiring: dimension mismatches, bad protocol
    /// parameters, incompatible attack/dataset combinations.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or out-of-contract input data.
    #[error("data error: {0}")]
    Data(String),

    /// API misuse, e.g. replaying a stale forward tape.
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite values encountered mid-run; the run is aborted.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Homomorphic-encryption protocol violations (key mismatch, overflow).
    #[error("crypto error: {0}")]
    Crypto(String),

    #[error("attack setup error: {0}")]
    AttackSetup(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
