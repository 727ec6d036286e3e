use crate::bits::BitString;
use crate::num::Dyadic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("decode error: {0}")]
    Decode(String),

    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("kraft sum {sum} exceeds 1")]
    KraftExceeded { sum: Dyadic },

    #[error("weights rejected: {0}")]
    InvalidWeights(String),

    #[error("enumeration of length {requested} refused: cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("support of {size} points exceeds the cap of {cap}")]
    SupportTooLarge { size: usize, cap: usize },

    #[error("cache error: {0}")]
    Cache(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("insufficient budget: no program found for {0}")]
    InsufficientBudget(BitString),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
