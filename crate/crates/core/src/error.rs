use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("galerkin level {requested} exceeds the {available} available eigenvalue shells")]
    LevelOutOfRange { requested: usize, available: usize },

    #[error("noise index {index} out of range for an ensemble of {len} fields")]
    NoiseIndex { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite state at step {step} (t = {time}): {detail}")]
    NonFinite { step: usize, time: f64, detail: String },

    #[error("time {requested} lies beyond the record horizon {horizon}")]
    BeyondRecord { requested: f64, horizon: f64 },

    #[error("malformed binary data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
