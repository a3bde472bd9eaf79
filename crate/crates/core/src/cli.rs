//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, ConfigError};
use crate::output::{write_csv, write_csv_to, OutputError};
use crate::scenario::{example, run, Overrides, ScenarioError};

#[derive(Debug, Parser)]
#[command(
    name = "combined-pid",
    version,
    about = "Simulate PID control loops and write CSV trajectories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output CSV path (standard output when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Noise seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample time in seconds
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Parameter override, `key=value` (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one of the built-in examples (1-7)
    Example { n: u32 },
    /// Run a scenario file
    Run { config: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) => 1,
            CliError::Config(ConfigError::Io { .. }) => 2,
            CliError::Config(_) => 1,
            CliError::Output(OutputError::Empty) => 1,
            CliError::Output(_) => 2,
        }
    }
}

fn overrides_of(cli: &Cli) -> Result<Overrides, ScenarioError> {
    let mut o = Overrides::new();
    if let Some(dt) = cli.dt {
        o = o.set("dt", dt);
    }
    if let Some(seed) = cli.seed {
        o = o.set("noise.seed", seed);
    }
    for text in &cli.overrides {
        o.push_assignment(text)?;
    }
    Ok(o)
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let overrides = overrides_of(cli)?;
    let scenario = match &cli.command {
        Command::Example { n } => example(*n, &overrides)?,
        Command::Run { config } => parse_config(config, &overrides)?,
    };
    let traj = run(&scenario)?;
    match &cli.out {
        Some(path) => write_csv(&traj, path)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv_to(&traj, &mut lock)?;
            lock.flush().map_err(OutputError::from)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
