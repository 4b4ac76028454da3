//! Time-fractional PDE solvers on the unit square.
//!
//! Two equations are covered, both with homogeneous Dirichlet boundary
//! conditions and a Caputo time derivative of order `alpha`:
//!
//! * **heat** (`0 < alpha < 1`): first-order-in-time fractional diffusion,
//! * **diffusion-wave** (`1 < alpha < 2`): second-order-in-time analogue.
//!
//! Both use the L1 quadrature in time: the fractional derivative at step `i`
//! becomes a weighted sum over all earlier steps with weights that telescope
//! (see [`l1_weights`] / [`wave_weights`]), so every step's right-hand side
//! needs the mass-weighted trajectory so far. The `*_standard` solvers keep
//! that trajectory verbatim; the `*_isvd` solvers route it through
//! [`crate::isvd`] and evaluate the history sum in the compressed
//! coefficient space.

mod gamma;
mod heat;
mod history;
mod wave;
mod weights;

pub use gamma::gamma;
pub use heat::solve_heat_isvd_observed;
pub use heat::{solve_heat_isvd, solve_heat_standard, solve_heat_standard_observed};
pub use history::{CompressedHistory, FullHistory, HistoryStore};
pub use wave::{
    solve_wave_isvd, solve_wave_isvd_observed, solve_wave_standard, solve_wave_standard_observed,
};
pub use weights::{l1_weights, wave_weights};

use thiserror::Error;

use crate::fem::{FemError, ScalarField};
use crate::isvd::IsvdError;
use crate::linalg::{conjugate_gradient, LinalgError, SkylineCholesky, SparseSpdMatrix};

/// Errors from solver configuration or execution.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Isvd(#[from] IsvdError),
}

/// Full description of one solver run.
#[derive(Debug, Clone)]
pub struct FracConfig {
    /// Fractional order: heat solvers need (0, 1), wave solvers (1, 2).
    pub alpha: f64,
    /// Final time `T`; the step is `T / n_steps`.
    pub t_final: f64,
    pub n_steps: usize,
    /// Grid resolution (`h = 1 / n_side`).
    pub n_side: usize,
    /// Truncation tolerance for the compressed-history solvers.
    pub tol: f64,
    /// Right-hand side `f(x, y, t)`.
    pub forcing: ScalarField,
    /// Initial value `u0(x, y)`.
    pub initial: ScalarField,
    /// Initial velocity `v0(x, y)` (wave solvers only).
    pub initial_velocity: ScalarField,
}

impl FracConfig {
    /// Built-in heat benchmark: `u0 = x y (1-x) (1-y)`,
    /// `f = 100 sin(2 pi t (x+y)) x (1-x) y (1-y)`.
    pub fn benchmark_heat(alpha: f64, n_side: usize, n_steps: usize, tol: f64) -> Self {
        Self {
            alpha,
            t_final: 1.0,
            n_steps,
            n_side,
            tol,
            forcing: ScalarField::new(|x, y, t| {
                100.0
                    * (2.0 * std::f64::consts::PI * t * (x + y)).sin()
                    * x
                    * (1.0 - x)
                    * y
                    * (1.0 - y)
            }),
            initial: ScalarField::new(|x, y, _| x * y * (1.0 - x) * (1.0 - y)),
            initial_velocity: ScalarField::zero(),
        }
    }

    /// Built-in diffusion-wave benchmark: same `u0`, constant forcing 1,
    /// zero initial velocity.
    pub fn benchmark_wave(alpha: f64, n_side: usize, n_steps: usize, tol: f64) -> Self {
        Self {
            alpha,
            t_final: 1.0,
            n_steps,
            n_side,
            tol,
            forcing: ScalarField::constant(1.0),
            initial: ScalarField::new(|x, y, _| x * y * (1.0 - x) * (1.0 - y)),
            initial_velocity: ScalarField::zero(),
        }
    }

    fn validate_common(&self) -> Result<(), SolveError> {
        if self.n_steps == 0 {
            return Err(SolveError::InvalidConfig("n_steps must be positive".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(SolveError::InvalidConfig(format!(
                "t_final must be positive and finite, got {}",
                self.t_final
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "tol must lie strictly between 0 and 1, got {}",
                self.tol
            )));
        }
        if self.n_side < 2 {
            return Err(SolveError::InvalidConfig(format!(
                "n_side must be at least 2, got {}",
                self.n_side
            )));
        }
        Ok(())
    }

    pub(crate) fn validate_heat(&self) -> Result<(), SolveError> {
        self.validate_common()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "heat equation needs 0 < alpha < 1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub(crate) fn validate_wave(&self) -> Result<(), SolveError> {
        self.validate_common()?;
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(SolveError::InvalidConfig(format!(
                "diffusion-wave equation needs 1 < alpha < 2, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// The solution at the final time step.
    pub final_solution: Vec<f64>,
    /// Discovered rank of the compressed trajectory; `None` for runs that
    /// keep the history verbatim.
    pub rank: Option<usize>,
    /// Peak bytes held by the trajectory storage (see [`HistoryStore`]).
    pub history_bytes: u64,
    /// Wall-clock time of the stepping loop (setup and assembly of the
    /// time-independent matrices excluded).
    pub wall_seconds: f64,
    /// Largest per-step linear-solve residual `||A u - rhs||`.
    pub max_residual: f64,
}

/// Per-run linear solver: one skyline Cholesky factorization up front,
/// conjugate gradients (relative residual 1e-14) if factorization fails.
pub(crate) struct SystemSolver {
    matrix: SparseSpdMatrix,
    direct: Option<SkylineCholesky>,
}

impl SystemSolver {
    pub(crate) fn new(matrix: SparseSpdMatrix) -> Self {
        let direct = matrix.cholesky().ok();
        Self { matrix, direct }
    }

    pub(crate) fn matrix(&self) -> &SparseSpdMatrix {
        &self.matrix
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        match &self.direct {
            Some(chol) => Ok(chol.solve(rhs)),
            None => conjugate_gradient(&self.matrix, rhs, 1e-14, 10 * rhs.len() + 100),
        }
    }
}

/// `||A x - b||` for residual tracking.
pub(crate) fn solve_residual(a: &SparseSpdMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = crate::linalg::spmv(a, x).expect("shape checked by caller");
    ax.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}
