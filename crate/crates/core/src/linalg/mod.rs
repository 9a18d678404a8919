//! Dense kernels used by training and POD: row-pivoted LU with many
//! right-hand sides, thin SVD (direct or by the method of snapshots) and a
//! symmetric eigensolver backing the latter.

mod eigen;
mod lu;
mod matrix;
mod svd;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use lu::{lu_factor, lu_solve_many, LuFactorization, PIVOT_THRESHOLD};
pub use matrix::{dot, dot_compensated, norm2, residual_compensated, Matrix};
pub use svd::{thin_svd, thin_svd_with, SvdMethod, ThinSvd, RANK_CUTOFF, SNAPSHOT_RATIO};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is numerically singular (pivot {pivot})")]
    SingularMatrix { pivot: usize },
    #[error("non-finite values in input or result")]
    NonFinite,
    #[error("iteration did not converge")]
    NoConvergence,
}
