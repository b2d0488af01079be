//! Shared error type for the numerical library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("quadrature failure on subinterval [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("manifold spec mismatch: expected dimension {expected}, got {got}")]
    SpecMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("aliasing: grid size {grid} is too small for band {band} (need at least {needed})")]
    Aliasing { grid: usize, band: i64, needed: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("functional parameter is not slowly varying (max deviation {max_deviation})")]
    NotSlowlyVarying { max_deviation: f64 },

    #[error("ambiguous numerical rank: sigma gap {gap} below the certificate threshold {threshold}")]
    AmbiguousRank { gap: f64, threshold: f64 },

    #[error("ill-conditioned projector decomposition: {0}")]
    IllConditioned(String),

    #[error("insufficient dyadic shells: found {found}, need at least {needed}")]
    InsufficientShells { found: usize, needed: usize },

    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
