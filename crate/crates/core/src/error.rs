use thiserror::Error;

/// Errors produced by scheme generation, space construction and the solvers.
#[derive(Debug, Error)]
pub enum NugsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequencies must be strictly increasing (violation at index {index})")]
    NotIncreasing { index: usize },

    #[error("frequency {value} at index {index} lies outside [-{bandwidth}, {bandwidth}]")]
    OutOfBand {
        index: usize,
        value: f64,
        bandwidth: f64,
    },

    #[error("unsupported filter: {0}")]
    UnsupportedFilter(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("Gram matrix is not positive definite")]
    GramNotPositiveDefinite,

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("system of {rows}x{cols} entries exceeds the memory guard of {limit}")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge (achieved {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NugsError>;
