use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty repertoire")]
    EmptyRepertoire,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("training diverged: loss is NaN at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("malformed maze file: {0}")]
    MalformedMaze(String),

    #[error("malformed config: {0}")]
    MalformedConfig(String),

    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
