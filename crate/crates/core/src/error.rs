use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input outside the operation's domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("operation requires the {required} picture of the mode space")]
    UnsupportedPicture { required: &'static str },

    #[error("non-finite value encountered while evaluating {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Feshbach pair rejected: {0}")]
    InvalidPair(String),

    #[error("degenerate atomic ground state: {0}")]
    Degenerate(String),

    #[error("root search failed: {0}")]
    RootSearch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
