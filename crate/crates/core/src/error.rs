use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Jacobi rotations did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("operator norm {norm} is not less than one")]
    NormNotLessThanOne { norm: f64 },

    #[error("Neumann series needs {needed} terms, more than the allowed {max_terms}")]
    MaxTermsExceeded { needed: usize, max_terms: usize },

    #[error("invalid tolerance {name} = {value}")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("metric constant k must be positive, got {0}")]
    NonPositiveK(f64),

    #[error("grid needs at least 2 nodes, got {0}")]
    GridTooSmall(usize),

    #[error("trace of length {len} is too short for window {window}")]
    TraceTooShort { len: usize, window: usize },

    #[error("coefficient norm {norm} must be less than one")]
    NormTooLarge { norm: f64 },

    #[error("bad coefficient: {0}")]
    BadCoefficient(String),

    #[error("norm bound must lie in (0, 1), got {0}")]
    BadBound(f64),

    #[error("mapping pair has no section of S")]
    NoSection,

    #[error("certificate kind {0} cannot drive this solver")]
    WrongCertificate(String),

    #[error("point {witness} is not a coincidence point (residual {residual:e})")]
    NotACoincidencePoint { witness: String, residual: f64 },

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
