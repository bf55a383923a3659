use thiserror::Error;

/// Errors produced by the numerical routines and file parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is empty")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix is defective (exceptional point): eigenvalue {value} has algebraic multiplicity {algebraic} but geometric multiplicity {geometric}")]
    Defective {
        value: String,
        algebraic: usize,
        geometric: usize,
    },

    #[error("singular value decomposition failed its accuracy check (defect {defect:e})")]
    SvdInaccurate { defect: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("the intertwiner equation VH = H\u{2020}V has only the trivial solution")]
    EmptyIntertwinerSpace,

    #[error("no invertible metric found; best candidate has condition number {condition:e}")]
    NoInvertibleMetric { condition: f64 },

    #[error("fixed gauge unavailable: {0}")]
    GaugeUnavailable(String),

    #[error("overflow guard: exponent {exponent} exceeds {limit}")]
    Overflow { exponent: f64, limit: f64 },

    #[error("step {step} too large: step * max|root| = {product} exceeds {limit}")]
    StepTooLarge { step: f64, product: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hamiltonian is not symmetric under the given antilinear map (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
