//! Fractional heat stepping (`0 < alpha < 1`).
//!
//! With `w = l1_weights(alpha, N)`, `scale = Gamma(2 - alpha) * dt^alpha`
//! and the mass/stiffness pair `(M, A)`, step `i` solves
//!
//! ```text
//! (M + scale A) u_i = scale b(t_i) + w[i-1] M u_0
//!                   + sum_{c=1}^{i-1} (w[i-c-1] - w[i-c]) M u_c
//! ```
//!
//! The trailing sum is one [`HistoryStore::combine`] call, which is where
//! the standard and compressed variants differ.

use std::time::Instant;

use crate::fem::{assemble_load, assemble_mass, assemble_stiffness, build_grid, l2_project};
use crate::linalg::{spmv, SparseSpdMatrix};

use super::history::{CompressedHistory, FullHistory, HistoryStore};
use super::weights::l1_weights;
use super::{gamma, solve_residual, FracConfig, RunReport, SolveError, SystemSolver};

/// Solve with the full, uncompressed history.
pub fn solve_heat_standard(cfg: &FracConfig) -> Result<RunReport, SolveError> {
    solve_heat_standard_observed(cfg, |_, _| {})
}

/// Like [`solve_heat_standard`], calling `observe(i, u_i)` for every step
/// including the projected initial value at `i = 0`.
pub fn solve_heat_standard_observed(
    cfg: &FracConfig,
    observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    run_heat(cfg, |mass| Ok(FullHistory::new(mass)), observe)
}

/// Solve with the history compressed by the incremental SVD at `cfg.tol`.
pub fn solve_heat_isvd(cfg: &FracConfig) -> Result<RunReport, SolveError> {
    solve_heat_isvd_observed(cfg, |_, _| {})
}

/// Like [`solve_heat_isvd`] with a per-step observer.
pub fn solve_heat_isvd_observed(
    cfg: &FracConfig,
    observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    run_heat(cfg, |mass| CompressedHistory::new(mass, cfg.tol), observe)
}

fn run_heat<S: HistoryStore>(
    cfg: &FracConfig,
    make_history: impl FnOnce(SparseSpdMatrix) -> Result<S, SolveError>,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    cfg.validate_heat()?;
    let grid = build_grid(cfg.n_side)?;
    let mass = assemble_mass(&grid);
    let stiff = assemble_stiffness(&grid);
    let mut history = make_history(mass.clone())?;

    let dt = cfg.t_final / cfg.n_steps as f64;
    let scale = gamma(2.0 - cfg.alpha) * dt.powf(cfg.alpha);
    let solver = SystemSolver::new(mass.add_scaled(&stiff, scale)?);
    let w = l1_weights(cfg.alpha, cfg.n_steps)?;

    let u0 = l2_project(&grid, &cfg.initial)?;
    observe(0, &u0);
    let mass_u0 = spmv(&mass, &u0)?;

    let mut u = u0;
    let mut max_residual = 0.0f64;
    let start = Instant::now();
    for i in 1..=cfg.n_steps {
        let load = assemble_load(&grid, &cfg.forcing, i as f64 * dt)?;
        let mut rhs: Vec<f64> = load
            .iter()
            .zip(&mass_u0)
            .map(|(b, m0)| scale * b + w[i - 1] * m0)
            .collect();
        if i >= 2 {
            let coeffs: Vec<f64> = (1..i).map(|c| w[i - c - 1] - w[i - c]).collect();
            let tail = history.combine(&coeffs)?;
            for (r, t) in rhs.iter_mut().zip(&tail) {
                *r += t;
            }
        }
        u = solver.solve(&rhs)?;
        max_residual = max_residual.max(solve_residual(solver.matrix(), &u, &rhs));
        history.push(&u)?;
        observe(i, &u);
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    Ok(RunReport {
        final_solution: u,
        rank: history.rank(),
        history_bytes: history.peak_bytes(),
        wall_seconds,
        max_residual,
    })
}
