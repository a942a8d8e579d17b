//! `robin`: run configurations through `robin_core` and write reports.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 a solver did not
//! converge, 3 a verification verdict failed.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] robin_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use robin_core::Error as E;
        match self {
            CliError::Solver(
                E::NotConverged { .. } | E::StepFailure { .. } | E::BracketNotFound { .. },
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "robin",
    version,
    about = "Robin eigenvalues of the p-Laplacian and their p → 1 limit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report formats; overrides `output.formats`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// First eigenvalue λ(Ω,p,β): radial shooting on balls, grid minimization otherwise.
    Eigen,
    /// Λ_h(Ω,β) and its optimal set.
    Limit,
    /// Discrete Cheeger constant and a Cheeger set.
    Cheeger,
    /// λ along `solver.p_list`, extrapolated to p = 1.
    Sweep,
    /// Inequality checks (`verify.checks`, or the default suite).
    Verify,
    /// Boundary-layer values for β < -1 over `solver.eps_list`.
    Blowup,
    /// Corner sets of a rounded square at β = -1.
    #[command(name = "demo-figure1")]
    DemoFigure1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Limit => "limit",
            Command::Cheeger => "cheeger",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Blowup => "blowup",
            Command::DemoFigure1 => "demo-figure1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Both,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.formats = match f {
            FormatArg::Json => vec![config::Format::Json],
            FormatArg::Csv => vec![config::Format::Csv],
            FormatArg::Both => vec![config::Format::Json, config::Format::Csv],
        };
    }
    commands::dispatch(cli.command, &cfg)
}
