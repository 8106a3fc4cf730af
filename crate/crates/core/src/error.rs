use thiserror::Error;

/// Errors produced by the simulator, learners and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unreachable link {from} -> {to} (rate {rate})")]
    UnreachableLink { from: String, to: String, rate: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index {index} out of range for {what} of length {len}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("UAV-C {0} is depleted and cannot be stepped")]
    Depleted(usize),

    #[error("replay buffer holds {have} transitions but a batch of {need} was requested")]
    Underfull { have: usize, need: usize },

    #[error("non-finite loss {loss} (batch of {batch}, max |td error| {max_td})")]
    NonFiniteLoss { loss: f64, batch: usize, max_td: f64 },

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
