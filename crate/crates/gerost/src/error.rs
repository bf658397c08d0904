//! Crate-wide error type.

/// Errors produced by manifold primitives, the inner maximization, the
/// tracker and the evaluation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rank deficient input: numerical rank {rank} < required {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("matrix is not symmetric: max |M_ij - M_ji| = {0:.3e}")]
    NotSymmetric(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
