use thiserror::Error;

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cluster count mismatch: {left} vs {right}")]
    ClusterCountMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} exceeds the number of samples n = {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("invalid initialization: {0}")]
    InvalidInit(String),

    #[error("true centers are not distinct (minimum separation is zero)")]
    CoincidentCenters,

    #[error("estimated center is exactly zero; the symmetric two-mixture update is degenerate")]
    DegenerateCenter,

    #[error("item {item} has no observed labels")]
    NoObservedLabels { item: usize },

    #[error("truncated SVD did not converge in {sweeps} sweeps (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SvdNotConverged {
        sweeps: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("could not obtain {k} non-empty clusters (only {found})")]
    EmptyClusters { k: usize, found: usize },
}
