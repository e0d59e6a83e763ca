use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("Fock level {level} is outside the truncated space of dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("truncation loses {deficit:e} of the norm (limit {limit:e})")]
    TruncationDeficit { deficit: f64, limit: f64 },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time must be non-negative and finite, got {0}")]
    NegativeTime(f64),

    #[error("determinant {0} differs from 1")]
    NotUnimodular(f64),

    #[error("Gauss decomposition is singular: lower-right entry is {0:e}")]
    SingularGauss(f64),

    #[error("analytic solution requires omega > gamma (omega = {omega}, gamma = {gamma})")]
    UnsupportedRegime { omega: f64, gamma: f64 },

    #[error("step size {h:e} violates the stability bound (h * rate = {product:e} > {limit})")]
    StepSize { h: f64, product: f64, limit: f64 },

    #[error("no steady state: mu ({mu}) must exceed nu ({nu})")]
    NoSteadyState { mu: f64, nu: f64 },

    #[error("truncation check failed: distance {distance:e} exceeds {limit:e}")]
    TruncationNotConverged { distance: f64, limit: f64 },
}
