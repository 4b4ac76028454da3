//! Benchmark harness: config parsing, solver matrix execution, CSV output.
//!
//! A benchmark run is described by a plain `key = value` text config (see
//! [`parse_config`] for the schema) and produces one [`CsvRow`] per
//! (grid, solver) pair. When both solvers run on a grid, the row also
//! carries their mass-weighted final discrepancy
//! `sqrt((u_std - u_isvd)^T M (u_std - u_isvd))` — the discrete L2 norm of
//! the difference, which is grid-size independent. A failed run yields an
//! `error` marker row and processing continues with the remaining work.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::fem::{assemble_mass, build_grid};
use crate::fracpde::{
    solve_heat_isvd, solve_heat_standard, solve_wave_isvd, solve_wave_standard, FracConfig,
    RunReport,
};

/// Which built-in problem a benchmark exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Fractional heat: `u0 = xy(1-x)(1-y)`,
    /// `f = 100 sin(2 pi t (x+y)) x(1-x) y(1-y)`, default `alpha = 0.1`.
    Heat,
    /// Fractional diffusion-wave: same `u0`, `f = 1`, `v0 = 0`, default
    /// `alpha = 1.5`.
    Wave,
}

impl Problem {
    /// Name used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Problem::Heat => "example1",
            Problem::Wave => "example2",
        }
    }

    fn default_alpha(self) -> f64 {
        match self {
            Problem::Heat => 0.1,
            Problem::Wave => 1.5,
        }
    }
}

/// Which solver variants to run per grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Standard,
    Isvd,
    Both,
}

impl SolverChoice {
    fn runs_standard(self) -> bool {
        matches!(self, SolverChoice::Standard | SolverChoice::Both)
    }

    fn runs_isvd(self) -> bool {
        matches!(self, SolverChoice::Isvd | SolverChoice::Both)
    }
}

/// A fully validated benchmark description.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub problem: Problem,
    pub alpha: f64,
    pub t_final: f64,
    pub dt: f64,
    /// `t_final / dt`, validated integral.
    pub n_steps: usize,
    pub tol: f64,
    /// Grid resolutions, one pair of rows each.
    pub grids: Vec<usize>,
    pub solver: SolverChoice,
    /// Output path from the config file; the CLI may override it.
    pub out: Option<PathBuf>,
    /// Reserved; the solvers are deterministic and draw no randomness.
    pub seed: u64,
}

/// Errors from [`parse_config`].
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("duplicate config key `{0}`")]
    DuplicateKey(String),
    #[error("config key `{key}`: {message}")]
    BadValue { key: String, message: String },
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        message: message.into(),
    }
}

/// Parse and validate a benchmark config.
///
/// Schema (one `key = value` per line, `#` starts a comment, every key
/// optional):
///
/// ```text
/// problem = example1 | example2 | heat | wave   (default example1)
/// alpha   = fractional order                    (default 0.1 heat, 1.5 wave)
/// T       = final time                          (default 1)
/// dt      = time step; T/dt must be integral    (default 1e-3)
/// tol     = compression tolerance in (0, 1)     (default 1e-12)
/// grids   = comma-separated n_side list, each >= 2   (default 8)
/// solver  = standard | isvd | both              (default both)
/// out     = CSV output path                     (default stdout)
/// seed    = u64, reserved                       (default 0)
/// ```
pub fn parse_config(text: &str) -> Result<BenchSpec, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::BadLine {
                line: lineno + 1,
                text: line.into(),
            });
        };
        let key = key.trim().to_string();
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::DuplicateKey(key));
        }
        pairs.push((key, value.trim().to_string()));
    }

    let mut problem = Problem::Heat;
    let mut alpha: Option<f64> = None;
    let mut t_final = 1.0;
    let mut dt = 1e-3;
    let mut tol = 1e-12;
    let mut grids = vec![8usize];
    let mut solver = SolverChoice::Both;
    let mut out = None;
    let mut seed = 0u64;

    for (key, value) in &pairs {
        match key.as_str() {
            "problem" => {
                problem = match value.as_str() {
                    "example1" | "heat" => Problem::Heat,
                    "example2" | "wave" => Problem::Wave,
                    other => {
                        return Err(bad(
                            "problem",
                            format!("expected example1|example2|heat|wave, got `{other}`"),
                        ))
                    }
                };
            }
            "alpha" => alpha = Some(parse_float("alpha", value)?),
            "T" => t_final = parse_float("T", value)?,
            "dt" => dt = parse_float("dt", value)?,
            "tol" => tol = parse_float("tol", value)?,
            "grids" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    let n: usize = part.trim().parse().map_err(|_| {
                        bad("grids", format!("`{}` is not a grid size", part.trim()))
                    })?;
                    list.push(n);
                }
                if list.is_empty() {
                    return Err(bad("grids", "list must be nonempty"));
                }
                grids = list;
            }
            "solver" => {
                solver = match value.as_str() {
                    "standard" => SolverChoice::Standard,
                    "isvd" => SolverChoice::Isvd,
                    "both" => SolverChoice::Both,
                    other => {
                        return Err(bad(
                            "solver",
                            format!("expected standard|isvd|both, got `{other}`"),
                        ))
                    }
                };
            }
            "out" => out = Some(PathBuf::from(value)),
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| bad("seed", format!("`{value}` is not a u64")))?;
            }
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
    }

    let alpha = alpha.unwrap_or_else(|| problem.default_alpha());
    match problem {
        Problem::Heat if !(alpha > 0.0 && alpha < 1.0) => {
            return Err(bad(
                "alpha",
                format!("heat problems need 0 < alpha < 1, got {alpha}"),
            ));
        }
        Problem::Wave if !(alpha > 1.0 && alpha < 2.0) => {
            return Err(bad(
                "alpha",
                format!("diffusion-wave problems need 1 < alpha < 2, got {alpha}"),
            ));
        }
        _ => {}
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(bad(
            "T",
            format!("must be positive and finite, got {t_final}"),
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(bad("dt", format!("must be positive and finite, got {dt}")));
    }
    let steps = t_final / dt;
    let rounded = steps.round();
    if rounded < 1.0 || (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(bad(
            "dt",
            format!("T/dt must be a whole number of steps, got {steps}"),
        ));
    }
    let n_steps = rounded as usize;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(bad(
            "tol",
            format!("must lie strictly between 0 and 1, got {tol}"),
        ));
    }
    for &n in &grids {
        if n < 2 {
            return Err(bad("grids", format!("n_side must be at least 2, got {n}")));
        }
    }

    Ok(BenchSpec {
        problem,
        alpha,
        t_final,
        dt,
        n_steps,
        tol,
        grids,
        solver,
        out,
        seed,
    })
}

fn parse_float(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse()
        .map_err(|_| bad(key, format!("`{value}` is not a number")))
}

/// One CSV output row. Metric fields are `None` when not applicable
/// (`rank_k` for standard runs, `l2_discrepancy` unless both solvers ran)
/// or when the run failed (`error` set).
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub problem: String,
    pub alpha: f64,
    pub n_side: usize,
    pub h: f64,
    pub dt: f64,
    pub tol: f64,
    pub solver: String,
    pub wall_seconds: Option<f64>,
    pub history_bytes: Option<u64>,
    pub rank_k: Option<usize>,
    pub l2_discrepancy: Option<f64>,
    pub error: Option<String>,
}

pub fn csv_header() -> &'static str {
    "problem,alpha,n_side,h,dt,tol,solver,wall_seconds,history_bytes,rank_k,l2_discrepancy"
}

/// Shortest round-trip float formatting; scientific outside [1e-4, 1e6).
fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e-4 && x.abs() < 1e6 {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Render one row in header order. Failed runs put the literal `error` in
/// the wall_seconds column and leave the remaining metrics empty; the
/// message itself goes to stderr, not the CSV.
pub fn format_row(row: &CsvRow) -> String {
    let head = format!(
        "{},{},{},{},{},{},{}",
        row.problem,
        fmt_float(row.alpha),
        row.n_side,
        fmt_float(row.h),
        fmt_float(row.dt),
        fmt_float(row.tol),
        row.solver
    );
    if row.error.is_some() {
        return format!("{head},error,,,");
    }
    format!(
        "{head},{},{},{},{}",
        row.wall_seconds.map(fmt_float).unwrap_or_default(),
        row.history_bytes.map(|b| b.to_string()).unwrap_or_default(),
        row.rank_k.map(|k| k.to_string()).unwrap_or_default(),
        row.l2_discrepancy.map(fmt_float).unwrap_or_default(),
    )
}

/// Write the header plus all rows.
pub fn write_csv<W: io::Write>(mut w: W, rows: &[CsvRow]) -> io::Result<()> {
    writeln!(w, "{}", csv_header())?;
    for row in rows {
        writeln!(w, "{}", format_row(row))?;
    }
    Ok(())
}

/// Peak history bytes of a completed run (instrumented store counters, not
/// OS-level memory).
pub fn report_memory(report: &RunReport) -> u64 {
    report.history_bytes
}

/// Execute the benchmark matrix: every grid in `spec.grids` times every
/// selected solver, in config order (standard before isvd). Solver failures
/// become error-marker rows; the remaining runs still execute.
pub fn run_bench(spec: &BenchSpec) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for &n_side in &spec.grids {
        let mut cfg = match spec.problem {
            Problem::Heat => FracConfig::benchmark_heat(spec.alpha, n_side, spec.n_steps, spec.tol),
            Problem::Wave => FracConfig::benchmark_wave(spec.alpha, n_side, spec.n_steps, spec.tol),
        };
        cfg.t_final = spec.t_final;

        let blank = CsvRow {
            problem: spec.problem.label().into(),
            alpha: spec.alpha,
            n_side,
            h: 1.0 / n_side as f64,
            dt: spec.dt,
            tol: spec.tol,
            solver: String::new(),
            wall_seconds: None,
            history_bytes: None,
            rank_k: None,
            l2_discrepancy: None,
            error: None,
        };

        let mut outcomes: Vec<(CsvRow, Option<RunReport>)> = Vec::new();
        for (name, run) in [
            ("standard", spec.solver.runs_standard()),
            ("isvd", spec.solver.runs_isvd()),
        ] {
            if !run {
                continue;
            }
            let mut row = blank.clone();
            row.solver = name.into();
            let result = match (spec.problem, name) {
                (Problem::Heat, "standard") => solve_heat_standard(&cfg),
                (Problem::Heat, _) => solve_heat_isvd(&cfg),
                (Problem::Wave, "standard") => solve_wave_standard(&cfg),
                (Problem::Wave, _) => solve_wave_isvd(&cfg),
            };
            match result {
                Ok(report) => {
                    row.wall_seconds = Some(report.wall_seconds);
                    row.history_bytes = Some(report.history_bytes);
                    row.rank_k = report.rank;
                    outcomes.push((row, Some(report)));
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    outcomes.push((row, None));
                }
            }
        }

        if let [(_, Some(a)), (_, Some(b))] = &outcomes[..] {
            if let Some(d) = mass_discrepancy(n_side, &a.final_solution, &b.final_solution) {
                for (row, _) in outcomes.iter_mut() {
                    row.l2_discrepancy = Some(d);
                }
            }
        }
        rows.extend(outcomes.into_iter().map(|(row, _)| row));
    }
    rows
}

/// `sqrt((a-b)^T M (a-b))` on the grid's interior nodes.
fn mass_discrepancy(n_side: usize, a: &[f64], b: &[f64]) -> Option<f64> {
    let grid = build_grid(n_side).ok()?;
    let mass = assemble_mass(&grid);
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let q = mass.quadratic_form(&diff);
    Some(q.max(0.0).sqrt())
}
