//! `varstab`: stability classification, the conjugate-point oracle and rod equilibria from the
//! command line.
//!
//! Exit codes: 0 stable, 1 unstable, 2 inconclusive or degenerate, 3 usage error, 4 numerical
//! failure. Commands without a verdict exit 0 on success.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod parse;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] varstab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "varstab", version, about = "Stability of stationary solutions of ∫ (θ' − A)²/2 − V(θ) ds")]
pub struct Cli {
    /// Worker threads (overrides VARSTAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a boundary-value problem by shooting and classify the solution(s).
    Classify(ClassifyArgs),
    /// Conjugate points, signed index and FD spectrum for −h'' + f h.
    Oracle(OracleArgs),
    /// Elastic rod equilibria.
    Rod {
        #[command(subcommand)]
        command: RodCommand,
    },
    /// Integrate one trajectory; CSV `s,theta,p` plus optional events JSON.
    Integrate(IntegrateArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// `pendulum:M=81`, `double_well:a=1,b=2`, `harmonic:k=1`, `polynomial:c0=..,c4=..`,
    /// `quadwell`, `json:{...}` or `@descriptor.json`.
    #[arg(long)]
    pub potential: String,
    /// Free ends, `A=<value>`.
    #[arg(long, conflicts_with = "dirichlet", required_unless_present = "dirichlet")]
    pub neumann: Option<String>,
    /// Fixed ends, `Ta=<value>,Tb=<value>`.
    #[arg(long)]
    pub dirichlet: Option<String>,
    /// Domain `a:b`.
    #[arg(long, default_value = "0:1")]
    pub interval: String,
    /// Starting θ(a) for free-end shooting.
    #[arg(long, allow_hyphen_values = true)]
    pub guess_theta0: Option<f64>,
    /// Starting θ'(a) for fixed-end shooting.
    #[arg(long, allow_hyphen_values = true)]
    pub guess_p0: Option<f64>,
    /// Shooting bracket `lo:hi` on the shooting parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub bracket: Option<String>,
    /// Without a guess: scan this range `lo:hi` of the shooting parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub scan_range: Option<String>,
    /// Without a guess: number of scan cells.
    #[arg(long, default_value_t = 256)]
    pub scan_cells: usize,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Root tolerance on the shooting parameter.
    #[arg(long, default_value_t = 1e-12)]
    pub root_tol: f64,
    /// Half-width of the band where α or β count as zero.
    #[arg(long, default_value_t = 1e-6)]
    pub band: f64,
    /// Also run the conjugate-point oracle on each solution.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Coefficient: `const:<c>` or `table:<path>` (CSV columns s,f).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "potential")]
    pub f: Option<String>,
    /// Build f = −V''(θ(s)) from a trajectory of this potential (with --theta0 and --p0).
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "potential")]
    pub theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "potential")]
    pub p0: Option<f64>,
    /// Interval `a:b` (ignored for tables, which carry their own span).
    #[arg(long, default_value = "0:1")]
    pub interval: String,
    #[arg(long, value_enum)]
    pub bc: BcArg,
    /// Cells of the coarse FD grid (the fine grid has twice as many).
    #[arg(long, default_value_t = 400)]
    pub fd_cells: usize,
    /// Number of inborn eigenvalues to list.
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
}

#[derive(Debug, Subcommand)]
pub enum RodCommand {
    /// All equilibria for given M and v.
    Enumerate(RodArgs),
    /// Length functions against e, as CSV.
    Curves(CurvesArgs),
    /// Brute-force free-end shooting census.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RodArgs {
    #[arg(long = "M")]
    pub m: f64,
    #[arg(long)]
    pub v: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub v: f64,
    /// Number of e values.
    #[arg(long, default_value_t = 400)]
    pub emax_grid: usize,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long = "M")]
    pub m: f64,
    #[arg(long)]
    pub v: f64,
    #[arg(long, default_value_t = 4000)]
    pub cells: usize,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub potential: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: f64,
    #[arg(long, default_value = "0:1")]
    pub interval: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the event list (turning points, crossings, flags) as JSON here.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    varstab::par::init_threads(cli.threads);
    match commands::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("varstab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
