//! `gameform` — analysis of two-player zero-sum continuous games from
//! the command line: classify points, scan for critical points, simulate
//! gradient-play, continue equilibria under cost perturbations, and
//! gather random-game statistics.
//!
//! Exit codes: 0 success, 1 strict-mode statistical failure, 2
//! validation or precondition error, 3 numerical failure.

mod commands;
mod json17;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gameform", version, about = "Zero-sum continuous game analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one strategy profile (critical / Nash-necessary /
    /// differential Nash / non-degenerate / hyperbolic).
    Classify(ClassifyArgs),
    /// Multistart search for critical points in a box.
    Find(FindArgs),
    /// Simulate gradient-play and write a trajectory CSV.
    Simulate(SimulateArgs),
    /// Track a critical point of `f + t g` as `t` grows.
    #[command(name = "continue")]
    Continue(ContinueArgs),
    /// Sample random games and aggregate classification statistics.
    Genericity(GenericityArgs),
}

#[derive(clap::Args)]
struct ClassifyArgs {
    /// Game config JSON file.
    #[arg(long)]
    game: PathBuf,
    /// Comma-separated joint coordinates, length m1 + m2.
    #[arg(long)]
    point: String,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(clap::Args)]
struct FindArgs {
    #[arg(long)]
    game: PathBuf,
    /// Search box as `LO,HI`, applied to every coordinate.
    #[arg(long, value_name = "LO,HI", default_value = "-2,2", allow_hyphen_values = true)]
    r#box: String,
    /// Number of Newton starts.
    #[arg(long, default_value_t = 16)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMode {
    Discrete,
    Rk4,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    game: PathBuf,
    /// Comma-separated initial joint coordinates.
    #[arg(long)]
    x0: String,
    #[arg(long, value_enum)]
    mode: SimMode,
    /// Step size(s) for discrete mode: `G` or `G1,G2`.
    #[arg(long, value_name = "G1[,G2]")]
    gamma: Option<String>,
    /// RK4 time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Discrete iteration count.
    #[arg(long)]
    iters: Option<usize>,
    /// RK4 final time.
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Observable: identity, policy1, or policy2.
    #[arg(long)]
    observable: Option<String>,
    /// Trajectory CSV path; a run manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Print a JSON summary (time average, final state, norms) to stdout.
    #[arg(long)]
    summary: bool,
}

#[derive(clap::Args)]
struct ContinueArgs {
    #[arg(long)]
    game: PathBuf,
    /// Perturbation game config (same dims as the base game).
    #[arg(long)]
    perturb: PathBuf,
    #[arg(long)]
    x0: String,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    steps: usize,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    RandomQuadraticPd,
    RandomPolynomial,
}

#[derive(clap::Args)]
struct GenericityArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Number of games to sample.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Player dimensions as `M1,M2`.
    #[arg(long, value_name = "M1,M2")]
    dims: String,
    /// Polynomial total degree (random_polynomial only).
    #[arg(long, default_value_t = 3)]
    degree: u32,
    #[arg(long, default_value_t = 1.0)]
    coeff_scale: f64,
    /// Multistart box as `LO,HI`.
    #[arg(long, value_name = "LO,HI", default_value = "-2,2", allow_hyphen_values = true)]
    r#box: String,
    /// Multistart seeds per game.
    #[arg(long, default_value_t = 16)]
    seeds: usize,
    /// Exit nonzero when any degenerate critical point is found.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    tols: TolArgs,
}

/// Classification tolerance overrides; unset fields keep the defaults.
#[derive(clap::Args)]
struct TolArgs {
    #[arg(long)]
    tol_omega: Option<f64>,
    #[arg(long)]
    tol_psd: Option<f64>,
    #[arg(long)]
    tol_pd: Option<f64>,
    #[arg(long)]
    tol_det: Option<f64>,
    #[arg(long)]
    tol_re: Option<f64>,
}

/// Command errors carrying their exit code class.
#[derive(Debug)]
enum CliError {
    /// Bad input, schema violation, or precondition failure: exit 2.
    Validation(String),
    /// Numerical failure (no convergence, non-finite state): exit 3.
    Numerical(String),
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }
}

impl From<gameform::games::ConfigError> for CliError {
    fn from(e: gameform::games::ConfigError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<gameform::games::GameError> for CliError {
    fn from(e: gameform::games::GameError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<gameform::classify::ClassifyError> for CliError {
    fn from(e: gameform::classify::ClassifyError) -> Self {
        use gameform::classify::ClassifyError::*;
        match e {
            Spectra(_) | NonFinite => Self::Numerical(e.to_string()),
            Game(_) | InvalidOptions(_) => Self::Validation(e.to_string()),
        }
    }
}

impl From<gameform::dynamics::DynamicsError> for CliError {
    fn from(e: gameform::dynamics::DynamicsError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<gameform::perturb::PerturbError> for CliError {
    fn from(e: gameform::perturb::PerturbError) -> Self {
        use gameform::perturb::PerturbError::*;
        match e {
            Classify(inner) => inner.into(),
            Precondition(_) | Game(_) | InvalidParams(_) => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Validation(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(args) => commands::classify(args),
        Command::Find(args) => commands::find(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Continue(args) => commands::continuation(args),
        Command::Genericity(args) => commands::genericity(args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
