use thiserror::Error;

#[derive(Debug, Error)]
pub enum FepError {
    #[error("delta must lie in [0, 1/2), got {0}")]
    DeltaOutOfRange(f64),

    #[error("{op} requires delta > 0")]
    DeltaZero { op: &'static str },

    #[error("gap table would exceed its cap of {cap} entries; delta is too small for exact sampling")]
    TableCapExceeded { cap: usize },

    #[error("walk length {0} exceeds the brute-force limit of 20 steps")]
    BruteForceTooLong(usize),

    #[error("lag {0} must be odd for the integral representation")]
    EvenLag(usize),

    #[error("correlation table holds {have} lags but {need} are needed")]
    TableTooShort { have: usize, need: usize },

    #[error("configuration is frozen: no particle can move")]
    Frozen,

    #[error("replica {replica} not frozen after {events} events")]
    NotFrozen { replica: u64, events: u64 },

    #[error("configuration has adjacent occupied sites at {0} and {1}")]
    AdjacentParticles(usize, usize),

    #[error("window cannot be classified: {0}")]
    Corrupted(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FepError>;

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..0.5).contains(&delta) {
        Ok(())
    } else {
        Err(FepError::DeltaOutOfRange(delta))
    }
}
