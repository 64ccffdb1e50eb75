//! Crate-wide error type.

use crate::algos::AlgoFailure;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor was handed a NaN or infinite entry.
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The operation is undefined for an all-zero matrix.
    #[error("matrix is zero")]
    ZeroMatrix,

    /// An iterative estimator ran out of iterations.
    #[error("no convergence after {iters} iterations")]
    NonConvergence { iters: usize },

    /// A triangular solve hit a zero or subnormal-tiny diagonal entry.
    #[error("singular triangular factor: diagonal entry {index} is unusable")]
    SingularTriangular { index: usize },

    /// The smallest computed singular value is exactly zero.
    #[error("matrix is numerically singular")]
    SingularMatrix,

    /// A Cholesky stage of a CholeskyQR-family algorithm failed.
    #[error("{0}")]
    Breakdown(AlgoFailure),

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    /// An input is outside the domain of a formula (e.g. k*u >= 1 for gamma_k).
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
