//! `fracstream` command line: run benchmark matrices or single solves and
//! emit CSV (see [`fracstream::bench`] for the row schema).
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure (error
//! rows were emitted; the CSV still contains every completed run).

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracstream::bench::{parse_config, run_bench, write_csv, CsvRow};

#[derive(Parser)]
#[command(
    name = "fracstream",
    version,
    about = "Time-fractional heat and diffusion-wave solver with on-the-fly history compression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark matrix described by a `key = value` config file.
    Bench {
        /// Config file path (run `solve --help` for the quick single-run form).
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here (overrides `out` from the config; default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one problem on one grid and print CSV to stdout.
    Solve {
        /// Built-in problem: example1 (heat) or example2 (diffusion-wave).
        #[arg(long)]
        problem: String,
        /// Grid resolution; the mesh width is 1/n_side.
        #[arg(long)]
        n_side: usize,
        /// Time step; 1/dt must be a whole number of steps.
        #[arg(long)]
        dt: f64,
        /// History compression tolerance, strictly between 0 and 1.
        #[arg(long)]
        tol: f64,
        /// standard, isvd, or both.
        #[arg(long)]
        solver: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                // Usage problems are configuration errors: exit 1, not
                // clap's default 2 (reserved here for solver failures).
                eprint!("{e}");
                return ExitCode::from(1);
            }
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    match cli.command {
        Command::Bench { config, out } => bench_command(&config, out),
        Command::Solve {
            problem,
            n_side,
            dt,
            tol,
            solver,
        } => solve_command(&problem, n_side, dt, tol, &solver),
    }
}

fn bench_command(config: &PathBuf, out_flag: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("fracstream: cannot read config {}: {e}", config.display());
            return ExitCode::from(1);
        }
    };
    let spec = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("fracstream: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = run_bench(&spec);
    emit(&rows, out_flag.or(spec.out))
}

fn solve_command(problem: &str, n_side: usize, dt: f64, tol: f64, solver: &str) -> ExitCode {
    // Route the flags through the config parser so both entry points share
    // one validation path (and its error messages).
    let text = format!(
        "problem = {problem}\ngrids = {n_side}\ndt = {dt}\ntol = {tol}\nsolver = {solver}\n"
    );
    let spec = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("fracstream: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = run_bench(&spec);
    emit(&rows, None)
}

fn emit(rows: &[CsvRow], out: Option<PathBuf>) -> ExitCode {
    for row in rows {
        if let Some(msg) = &row.error {
            eprintln!(
                "fracstream: {} n_side={} ({}): {msg}",
                row.problem, row.n_side, row.solver
            );
        }
    }
    let written = match &out {
        Some(path) => File::create(path).and_then(|mut f| write_csv(&mut f, rows)),
        None => write_csv(io::stdout().lock(), rows).and_then(|_| io::stdout().flush()),
    };
    if let Err(e) = written {
        match &out {
            Some(path) => eprintln!("fracstream: cannot write {}: {e}", path.display()),
            None => eprintln!("fracstream: cannot write output: {e}"),
        }
        return ExitCode::from(1);
    }
    if rows.iter().any(|r| r.error.is_some()) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
