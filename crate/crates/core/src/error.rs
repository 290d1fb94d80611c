use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid simplex vector: {0}")]
    InvalidSimplex(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("enumeration of {count} candidates exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("objective `{0}` has unbounded Lipschitz constant; use the bi-criteria solver")]
    UnboundedLipschitz(String),

    #[error("no closed-form worst corruption for objective `{0}`")]
    Unavailable(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no equilibrium found among {candidates} s-uniform profiles (s = {s})")]
    NoEquilibriumFound { candidates: u128, s: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
