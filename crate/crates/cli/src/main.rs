mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "symred",
    version,
    about = "Symmetry reduction for affine and kinematic optimal control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Built-in problem name; overrides `problem` in the config.
    #[arg(long)]
    problem: Option<String>,
    /// Config override, `key=value` with a TOML value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full canonical flow; write the trajectory and conservation report.
    Simulate(RunArgs),
    /// Integrate full and reduced flows from matched data and compare them.
    ReduceCompare(RunArgs),
    /// Solve the fixed-endpoint problem by full and/or reduced shooting.
    Shoot(RunArgs),
    /// Run the symmetry, connection, and curvature property checks.
    Verify(RunArgs),
    /// List built-in problems.
    List,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(symred::Error),
    Io(std::io::Error),
    NotConverged(String),
    VerifyFailed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::NotConverged(m) => write!(f, "shooting did not converge: {m}"),
            CliError::VerifyFailed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<symred::Error> for CliError {
    fn from(e: symred::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::VerifyFailed(_) => 5,
        }
    }
}

fn run(
    args: &RunArgs,
    f: fn(&config::RunConfig, &std::path::Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let cfg = config::load(args.config.as_deref(), &args.set, args.problem.as_deref())?;
    f(&cfg, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run(a, commands::simulate),
        Command::ReduceCompare(a) => run(a, commands::reduce_compare),
        Command::Shoot(a) => run(a, commands::shoot),
        Command::Verify(a) => run(a, commands::verify),
        Command::List => {
            commands::list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symred: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
