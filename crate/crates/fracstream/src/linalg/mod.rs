//! Dense and sparse linear algebra primitives.
//!
//! Everything here is sized for the workloads of the rest of the crate:
//! dense matrices stay small (a few hundred rows/columns, driven by the
//! discovered rank of a trajectory), while sparse matrices are the
//! finite-element mass and stiffness matrices, which are symmetric positive
//! definite with a narrow band. The SVD is a one-sided Jacobi iteration,
//! chosen for its simplicity and its high relative accuracy on the
//! graded-spectrum matrices produced by truncation updates.

mod dense;
mod sparse;
mod svd;

pub use dense::{DenseMatrix, SvdTriple};
pub use sparse::{
    conjugate_gradient, spd_solve, spmv, SkylineCholesky, SparseSpdMatrix, SpdBuilder,
};
pub use svd::{dense_svd_econ, dense_svd_full};

use thiserror::Error;

/// Errors from dense/sparse kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {context} (got {got}, expected {expected})")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    /// An input contained NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// A matrix required to be SPD failed a definiteness check.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    /// A matrix required to be symmetric has an asymmetric entry pattern.
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),
    /// Matrix with no rows or no columns where a nonempty one is required.
    #[error("empty matrix in {0}")]
    EmptyMatrix(&'static str),
    /// An iterative solver ran out of iterations.
    #[error("iterative solver failed to converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
}
