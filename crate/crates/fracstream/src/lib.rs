//! Solvers for time-fractional heat and diffusion-wave equations on the unit
//! square, with optional on-the-fly compression of the solution history.
//!
//! Time-fractional equations carry a memory term: every new time step needs a
//! weighted sum over *all* previous steps, so a naive solver keeps the entire
//! trajectory in memory. This crate implements the standard L1 time-stepping
//! scheme over a piecewise-linear finite element discretization, plus a
//! variant that feeds each computed step into an incremental truncated SVD and
//! evaluates the memory term from the compressed factors instead of the raw
//! history. For smooth problems the trajectory has rapidly decaying singular
//! values, so the compressed run reproduces the standard one to near machine
//! precision at a small fraction of the storage.
//!
//! Module map:
//!
//! * [`linalg`] — dense column-major matrices, a one-sided Jacobi SVD, and
//!   sparse symmetric positive definite solvers (skyline Cholesky with a
//!   conjugate-gradient fallback).
//! * [`fem`] — P1 finite elements on a uniform right-triangle grid over
//!   (0,1)^2 with homogeneous Dirichlet boundary conditions.
//! * [`isvd`] — the incremental truncated SVD: rank-one updates with a
//!   residual buffer, deferred rotation application, and tolerance-based
//!   truncation.
//! * [`fracpde`] — fractional-derivative quadrature weights and the four
//!   solver entry points (heat/wave x standard/compressed).
//! * [`bench`] — config parsing, benchmark orchestration, and CSV reporting
//!   used by the `fracstream` binary.

pub mod bench;
pub mod fem;
pub mod fracpde;
pub mod isvd;
pub mod linalg;
