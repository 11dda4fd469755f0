//! Command-line front end for the wavelet optimal-control solver:
//! parse a JSON problem description, then solve, sweep, tabulate, or
//! run the built-in invariant suite, emitting aligned text tables on
//! stdout and machine-precision CSV files.

mod commands;
mod format;
mod problem;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavelet_focp::focp_solver::SolverError;
use wavelet_focp::operational::OperationalError;

/// Exit code for configuration problems: unreadable or malformed
/// problem files, out-of-range orders, invalid flag combinations.
const EXIT_CONFIG: u8 = 2;
/// Exit code for singular or numerically unusable linear systems.
const EXIT_SINGULAR: u8 = 3;
/// Exit code for tolerance or validation failures on otherwise
/// well-posed runs.
const EXIT_TOLERANCE: u8 = 4;

/// Basis family selector. Both families integrate the dynamics at the
/// configured order μ; they differ in the support geometry the basis
/// itself is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Uniform supports (basis order 1) with the order-μ integration
    /// matrix assembled over that basis.
    Obw,
    /// Fractional supports: the basis order equals the dynamics order.
    Fbw,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Obw => "obw",
            Method::Fbw => "fbw",
        }
    }

    /// Basis order used for a run at dynamics order `mu`.
    pub fn basis_order(self, mu: f64) -> f64 {
        match self {
            Method::Obw => 1.0,
            Method::Fbw => mu,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "focp",
    about = "Two-state/one-control linear-quadratic fractional optimal control \
             via Bernoulli wavelet operational matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at each requested order and write solution/summary CSVs.
    Solve(RunArgs),
    /// Cost comparison over the requested orders: uniform vs fractional
    /// basis, one row per μ (the --method flag is ignored here).
    Compare(RunArgs),
    /// State and control value tables over the grid, one column per
    /// (μ, method) pair.
    Tables(RunArgs),
    /// Run the built-in invariant suite and report pass/fail per check.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem description file (JSON).
    problem: PathBuf,

    /// Basis family.
    #[arg(long, value_enum, default_value_t = Method::Fbw)]
    method: Method,

    /// Resolution level; the basis uses 2^(k−1) blocks.
    #[arg(long, default_value_t = 2)]
    k: u32,

    /// Polynomials per block.
    #[arg(long = "M", default_value_t = 3)]
    m: usize,

    /// Dynamics order μ in (0, 1]; repeat the flag to sweep.
    #[arg(long = "mu", default_value = "1.0")]
    mu: Vec<f64>,

    /// Gauss–Legendre panel order for all assembly integrals.
    #[arg(long, env = "FOCP_QUAD_ORDER", default_value_t = 40)]
    quad_order: usize,

    /// Directory the CSV files are written into.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Evaluation grid as comma-separated ζ values in [0, 1].
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

impl RunArgs {
    /// Grid used for solution output and residual reporting.
    fn grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| (1..=9).map(|i| i as f64 / 10.0).collect())
    }

    /// Front-line range checks, so bad flags fail as configuration
    /// errors instead of surfacing as solver internals.
    fn check(&self) -> Result<(), CliError> {
        if self.mu.is_empty() {
            return Err(CliError::Config("at least one --mu value is required".into()));
        }
        for &mu in &self.mu {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(CliError::Config(format!("--mu must lie in (0, 1], got {mu}")));
            }
        }
        if !(1..=128).contains(&self.quad_order) {
            return Err(CliError::Config(format!(
                "--quad-order must lie in 1..=128, got {}",
                self.quad_order
            )));
        }
        for &z in &self.grid() {
            if !(0.0..=1.0).contains(&z) {
                return Err(CliError::Config(format!("grid point {z} lies outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Gauss–Legendre panel order for the suite's integrals.
    #[arg(long, env = "FOCP_QUAD_ORDER", default_value_t = 40)]
    quad_order: usize,

    /// Perturb Bernoulli number B_INDEX for the duration of the suite
    /// (sensitivity self-check: the suite must then fail).
    #[arg(long, value_name = "INDEX")]
    perturb_bernoulli: Option<usize>,

    /// Offset added to the perturbed Bernoulli number.
    #[arg(long, value_name = "DELTA", default_value_t = 1e-3)]
    perturb_delta: f64,
}

/// CLI-level error carrying its process exit code.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Validation(_) => EXIT_TOLERANCE,
            CliError::Solver(err) => match err {
                SolverError::InvalidProblem { .. } => EXIT_CONFIG,
                SolverError::SingularKkt { .. } => EXIT_SINGULAR,
                SolverError::ToleranceExceeded { .. } => EXIT_TOLERANCE,
                SolverError::Operational(op) => match op {
                    OperationalError::Basis(_)
                    | OperationalError::Quadrature(_)
                    | OperationalError::InvalidOrder(_) => EXIT_CONFIG,
                    OperationalError::IllConditioned { .. }
                    | OperationalError::SingularGram { .. }
                    | OperationalError::DimensionMismatch { .. } => EXIT_SINGULAR,
                },
            },
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => commands::solve(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Tables(args) => commands::tables(&args),
        Command::Validate(args) => commands::validate(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
