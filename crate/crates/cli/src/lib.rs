//! Command-line front end: problem files, command dispatch and reports.

pub mod commands;
pub mod problem;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use oscidecay_core::nondegeneracy::NondegError;
use oscidecay_core::poly::{ParseError, PolyError};
use oscidecay_core::quadrature::QuadError;
use oscidecay_core::strategy::StrategyError;
use oscidecay_core::uniformity::UniformityError;
use thiserror::Error;

pub use problem::Problem;
pub use report::{Report, Status, SCHEMA};

/// Every error maps to exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown preset {0} (available: lightcone6, flex1, flex2, planar3)")]
    UnknownPreset(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("problem file: {0}")]
    Toml(String),
    #[error("{field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Nondeg(#[from] NondegError),
    #[error(transparent)]
    Uniformity(#[from] UniformityError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Debug, Parser)]
#[command(name = "oscidecay", version, about = "Decay certificates for multilinear oscillatory integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Built-in problem: lightcone6, flex1, flex2 or planar3.
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    pub preset: Option<String>,
    /// Problem file (TOML).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Replaces the problem's phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<String>,
    #[arg(long)]
    pub degree_bound: Option<u32>,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn load(&self) -> Result<Problem, CliError> {
        let base = match (&self.preset, &self.problem) {
            (Some(name), _) => Problem::preset(name)?,
            (None, Some(path)) => Problem::load(path)?,
            (None, None) => return Err(CliError::Invalid("need --preset or --problem".into())),
        };
        base.with_overrides(self.phase.as_deref(), self.degree_bound)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the phase is a sum of polynomials in the projections.
    CheckDegenerate {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Check that every small set of projections is independent.
    GeneralPosition {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Uniform positivity of D P over the frozen coordinates.
    HypCheck {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Coordinates held fixed, e.g. `z` or `z,w`.
        #[arg(long, value_delimiter = ',', required = true)]
        frozen: Vec<String>,
        /// Directions as linear forms separated by `;`, e.g. `x; y; x - y`.
        /// Defaults to a search over the reduced system's witness pool.
        #[arg(long, allow_hyphen_values = true)]
        operator: Option<String>,
    },
    /// Nondegeneracy of P(x) - P(x + zeta e) for |zeta| >= 1.
    DiffPhaseCheck {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Factor pulled out before the shift (1-based).
        #[arg(long, default_value_t = 1)]
        pivot: usize,
        /// Shift coordinate; defaults to the first one the pivot ignores.
        #[arg(long)]
        direction: Option<String>,
    },
    /// Enumerate and rank decay certificates.
    Strategy {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Largest frozen set; defaults to m - 2.
        #[arg(long)]
        max_freeze: Option<usize>,
    },
    /// Numerical decay exponent of the integral.
    EstimateDecay {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 4.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 256.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 9)]
        lambda_steps: usize,
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        /// Samples and envelope as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl Command {
    pub fn problem_args(&self) -> &ProblemArgs {
        match self {
            Command::CheckDegenerate { problem }
            | Command::GeneralPosition { problem }
            | Command::HypCheck { problem, .. }
            | Command::DiffPhaseCheck { problem, .. }
            | Command::Strategy { problem, .. }
            | Command::EstimateDecay { problem, .. } => problem,
        }
    }
}

/// Runs a parsed command. Files named by `--json` and `--csv` are written.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let args = cli.command.problem_args();
    let problem = args.load()?;
    let report = match &cli.command {
        Command::CheckDegenerate { .. } => commands::check_degenerate(&problem)?,
        Command::GeneralPosition { .. } => commands::general_position(&problem)?,
        Command::HypCheck { frozen, operator, .. } => {
            commands::hyp_check(&problem, frozen, operator.as_deref())?
        }
        Command::DiffPhaseCheck { pivot, direction, .. } => {
            commands::diff_phase_check(&problem, *pivot, direction.as_deref())?
        }
        Command::Strategy { max_freeze, .. } => commands::strategy(&problem, *max_freeze)?,
        Command::EstimateDecay {
            lambda_min,
            lambda_max,
            lambda_steps,
            rel_tol,
            csv,
            ..
        } => {
            let opts = commands::DecayOptions {
                lambda_min: *lambda_min,
                lambda_max: *lambda_max,
                lambda_steps: *lambda_steps,
                rel_tol: *rel_tol,
            };
            let (report, rows) = commands::estimate_decay(&problem, &opts)?;
            if let Some(path) = csv {
                report::write_csv(path, &rows)?;
            }
            report
        }
    };
    if let Some(path) = &args.json {
        report.write_json(path)?;
    }
    Ok(report)
}
