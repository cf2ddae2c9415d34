//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must live on the same sphere do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A series could not be truncated to the requested tolerance within the
    /// iteration cap; `achieved` is the certified bound actually reached.
    #[error("truncation cap at N={n}: achieved bound {achieved:.3e} > tol {tol:.3e}")]
    Truncation { achieved: f64, tol: f64, n: u64 },

    /// A quantity that must be finite diverges for the given inputs.
    #[error("divergent: {0}")]
    Divergent(String),

    /// A matrix that should be positive semidefinite failed to factorize.
    #[error("matrix not positive semidefinite: {0}")]
    NotPsd(String),

    /// Integer overflow in exact combinatorial arithmetic.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// The eigensolver backing quadrature construction failed.
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    /// A model document or run configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
