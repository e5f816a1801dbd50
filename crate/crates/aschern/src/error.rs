//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical kernels and cocycle evaluators.
#[derive(Error, Debug, Clone)]
pub enum Error {
    /// Input matrix is not square, contains NaN/Inf, or has mismatched sizes.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A stated precondition on the values (e.g. Hermitian symmetry) fails.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Matrix is singular or too ill-conditioned to invert reliably.
    #[error("singular or ill-conditioned matrix: {0}")]
    Singular(String),

    /// Argument outside the mathematical domain of the operation
    /// (branch condition, wrong parity of the degree, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested configuration is outside what the implementation supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// The proximity (gap) condition failed for a tuple of sample points.
    #[error("gap condition violated: {0}")]
    GapViolation(String),

    /// An eigenvalue of the interpolated operator came too close to the
    /// spectral threshold 1/2.
    #[error("spectral gap too small: {0}")]
    SpectralGap(String),

    /// An integrand returned a non-finite value at a quadrature node.
    #[error("integrand failure at node {node:?}: {detail}")]
    IntegrandFailure { node: Vec<f64>, detail: String },

    /// A generator's admissibility bound (edge gap, mesh size) is violated.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    /// A model parameter set is rejected (e.g. the Bloch Hamiltonian gap closes).
    #[error("model error: {0}")]
    Model(String),

    /// Sample ranks disagree where a common rank is required.
    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    /// Finite-difference step too large for the cochain's gap.
    #[error("step too large: {0}")]
    StepTooLarge(String),

    /// I/O or de/serialization failure.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
