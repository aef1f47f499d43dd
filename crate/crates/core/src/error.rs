use thiserror::Error;

/// Errors raised by model construction, geometry and the Morse pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownEntry {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid parameters for `{model}`: {reason}")]
    InvalidParams { model: String, reason: String },

    #[error("invariant `{check}` violated (residual {residual:.3e})")]
    InvariantViolation { check: String, residual: f64 },

    #[error("zero-weight space exceeds a: p-part of the centralizer has dimension {found}, a has dimension {rank}")]
    NotMaximalAbelian { found: usize, rank: usize },

    #[error("point is not regular: root {root} vanishes (value {value:.3e})")]
    NonRegular { root: usize, value: f64 },

    #[error("Weyl group closure exceeded {0} elements")]
    WeylOverflow(usize),

    #[error("point is not critical: gradient norm {0:.3e}")]
    NotCritical(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed model document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
