//! Fractional diffusion-wave stepping (`1 < alpha < 2`).
//!
//! With `w = wave_weights(alpha, N)` and `scale = Gamma(3 - alpha) *
//! dt^alpha`, step `n` solves
//!
//! ```text
//! (M + scale A) u^{n+1} = scale b(t_{n+1}) + M (2 u^n - u^{n-1})
//!   - sum_{k=1}^{n} w[k-1] (M u^{n-k+1} - 2 M u^{n-k} + M u^{n-k-1})
//! ```
//!
//! seeded by the interpolated initial value `u^0` and the ghost step
//! `u^{-1} = u^0 - dt * v^0`. Regrouping the sum per solution column turns
//! it into a single [`HistoryStore::combine`] over the stored trajectory
//! `[u^{-1}, u^0, ..., u^n]`: column `s` carries the second-difference
//! weight `-(bw(n-s+2) - 2 bw(n-s+1) + bw(n-s))` where `bw(k) = w[k-1]`
//! inside `1 <= k <= n` and 0 outside. The leading `M (2 u^n - u^{n-1})`
//! term always uses the exactly tracked last two iterates, never their
//! compressed images.

use std::time::Instant;

use crate::fem::{assemble_load, assemble_mass, assemble_stiffness, build_grid, interpolate};
use crate::linalg::{spmv, SparseSpdMatrix};

use super::history::{CompressedHistory, FullHistory, HistoryStore};
use super::weights::wave_weights;
use super::{gamma, solve_residual, FracConfig, RunReport, SolveError, SystemSolver};

/// Solve with the full, uncompressed history.
pub fn solve_wave_standard(cfg: &FracConfig) -> Result<RunReport, SolveError> {
    solve_wave_standard_observed(cfg, |_, _| {})
}

/// Like [`solve_wave_standard`], calling `observe(n, u^n)` for every step
/// including the interpolated initial value at `n = 0` (the ghost step is
/// not reported).
pub fn solve_wave_standard_observed(
    cfg: &FracConfig,
    observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    run_wave(cfg, |mass| Ok(FullHistory::new(mass)), observe)
}

/// Solve with the history compressed by the incremental SVD at `cfg.tol`.
pub fn solve_wave_isvd(cfg: &FracConfig) -> Result<RunReport, SolveError> {
    solve_wave_isvd_observed(cfg, |_, _| {})
}

/// Like [`solve_wave_isvd`] with a per-step observer.
pub fn solve_wave_isvd_observed(
    cfg: &FracConfig,
    observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    run_wave(cfg, |mass| CompressedHistory::new(mass, cfg.tol), observe)
}

fn run_wave<S: HistoryStore>(
    cfg: &FracConfig,
    make_history: impl FnOnce(SparseSpdMatrix) -> Result<S, SolveError>,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<RunReport, SolveError> {
    cfg.validate_wave()?;
    let grid = build_grid(cfg.n_side)?;
    let mass = assemble_mass(&grid);
    let stiff = assemble_stiffness(&grid);
    let mut history = make_history(mass.clone())?;

    let dt = cfg.t_final / cfg.n_steps as f64;
    let scale = gamma(3.0 - cfg.alpha) * dt.powf(cfg.alpha);
    let solver = SystemSolver::new(mass.add_scaled(&stiff, scale)?);
    let w = wave_weights(cfg.alpha, cfg.n_steps)?;

    let u_start = interpolate(&grid, &cfg.initial)?;
    let v_start = interpolate(&grid, &cfg.initial_velocity)?;
    let ghost: Vec<f64> = u_start
        .iter()
        .zip(&v_start)
        .map(|(u, v)| u - dt * v)
        .collect();
    observe(0, &u_start);
    history.push(&ghost)?;
    history.push(&u_start)?;

    let mut u_prev = ghost;
    let mut u_cur = u_start;
    let mut max_residual = 0.0f64;
    let start = Instant::now();
    for n in 0..cfg.n_steps {
        let load = assemble_load(&grid, &cfg.forcing, (n + 1) as f64 * dt)?;
        let lead: Vec<f64> = u_cur
            .iter()
            .zip(&u_prev)
            .map(|(c, p)| 2.0 * c - p)
            .collect();
        let mass_lead = spmv(&mass, &lead)?;
        let mut rhs: Vec<f64> = load
            .iter()
            .zip(&mass_lead)
            .map(|(b, l)| scale * b + l)
            .collect();

        let bw = |k: i64| {
            if k >= 1 && k as usize <= n {
                w[(k - 1) as usize]
            } else {
                0.0
            }
        };
        let coeffs: Vec<f64> = (0..history.len() as i64)
            .map(|s| {
                let n = n as i64;
                -(bw(n - s + 2) - 2.0 * bw(n - s + 1) + bw(n - s))
            })
            .collect();
        let tail = history.combine(&coeffs)?;
        for (r, t) in rhs.iter_mut().zip(&tail) {
            *r += t;
        }

        let u_next = solver.solve(&rhs)?;
        max_residual = max_residual.max(solve_residual(solver.matrix(), &u_next, &rhs));
        history.push(&u_next)?;
        observe(n + 1, &u_next);
        u_prev = u_cur;
        u_cur = u_next;
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    Ok(RunReport {
        final_solution: u_cur,
        rank: history.rank(),
        history_bytes: history.peak_bytes(),
        wall_seconds,
        max_residual,
    })
}
