use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("entry buffer has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("invalid tensor factorization: {0}")]
    InvalidDims(String),

    #[error("basis is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("operator does not commute with the copy map (deviation {deviation:e})")]
    NotCommuting { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("tensor dimension {dim} exceeds the budget of {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error("derivative couples two kernel directions of the state (weight {weight:e})")]
    SupportLeak { weight: f64 },

    #[error("disentangled output has trace {trace}, expected 1")]
    TraceNotRestored { trace: f64 },
}
