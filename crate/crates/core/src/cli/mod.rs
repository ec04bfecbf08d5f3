//! Batch front-end: `eigen | solve | threshold | diagram | check`.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{exit_code, run, Outcome};
pub use config::RunConfig;

use config::MethodName;

#[derive(Debug, Parser)]
#[command(name = "nonlocal-ap", version, about = "Nyström solvers for nonlocal Ambrosetti-Prodi problems")]
#[command(after_long_help = config::CONFIG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenpair of the discrete operator (JSON).
    Eigen(Common),
    /// One solution at the configured t (JSON, or CSV when --out ends in .csv).
    Solve(SolveArgs),
    /// Bracket the largest solvable t (JSON).
    Threshold(SolveArgs),
    /// Solution counts over [diagram] t_values (CSV).
    Diagram(DiagramArgs),
    /// Kernel and nonlinearity audit (JSON).
    Check(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Overrides [solver] method.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Also write an SVG plot of counts and solution extrema.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Monotone,
    Picard,
    Newton,
    Auto,
}

impl From<MethodArg> for MethodName {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Monotone => MethodName::Monotone,
            MethodArg::Picard => MethodName::Picard,
            MethodArg::Newton => MethodName::Newton,
            MethodArg::Auto => MethodName::Auto,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Run(#[from] crate::error::Error),
}
