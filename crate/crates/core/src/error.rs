use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("signal too short: need more than {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },

    #[error("unstable filter design: pole radius {radius:.6} >= 1")]
    UnstableFilter { radius: f64 },

    #[error("stimulus trigger {index} at sample {sample} has fewer than {needed} samples of history")]
    TriggerTooEarly {
        index: usize,
        sample: usize,
        needed: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
