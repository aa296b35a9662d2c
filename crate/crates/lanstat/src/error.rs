use thiserror::Error;

/// Errors produced by the model, Toeplitz and estimation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter vector lies outside the open parameter space of its model.
    #[error("parameter out of domain: {0}")]
    Parameter(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated an API contract (dimension mismatch, asymmetric
    /// symbol list, singular rate matrix, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Cholesky factorization failed; the symbol is not strictly positive or
    /// the autocovariances carry too much quadrature error.
    #[error("matrix not positive definite at pivot {pivot} (value {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// Data unsuitable for the requested estimator.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Model id or audit id not known to this build.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
