//! `lpp`: last-passage percolation bounds and simulations.
//!
//! Exit status: 0 on success, 1 on a runtime failure, 2 on a configuration
//! or validation error.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use config::{load_file, CommonArgs, ConfigError};

#[derive(Debug, Parser)]
#[command(
    name = "lpp",
    version,
    about = "Last-passage percolation on Z^d: entropy bounds and Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the entropy bound at a direction or over a simplex grid
    Bound(BoundArgs),
    /// Estimate the time constant g(x) by simulation
    Simulate(SimulateArgs),
    /// Estimate tail probabilities of T(l p)/l against the Chernoff bound
    Tail(TailArgs),
    /// Compare simulated estimates with the bound over several directions
    Compare(CompareArgs),
    /// Count (and optionally list) directed paths from the origin to z
    Paths(PathsArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Bound(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Tail(a) => &a.common,
            Command::Compare(a) => &a.common,
            Command::Paths(a) => &a.common,
        }
    }

    fn run(&self) -> CmdResult<(config::Common, Outcome)> {
        match self {
            Command::Bound(a) => cmd_bound(a),
            Command::Simulate(a) => cmd_simulate(a),
            Command::Tail(a) => cmd_tail(a),
            Command::Compare(a) => cmd_compare(a),
            Command::Paths(a) => cmd_paths(a),
        }
    }
}

fn threads(cmd: &Command) -> CmdResult<Option<usize>> {
    let args = cmd.common();
    let threads = match args.threads {
        Some(t) => Some(t),
        None => load_file(args)?.threads,
    };
    if threads == Some(0) {
        return Err(ConfigError("invalid value for `threads`: must be ≥ 1".into()).into());
    }
    Ok(threads)
}

fn execute(cmd: &Command) -> CmdResult<()> {
    let run = || -> CmdResult<()> {
        let (common, outcome) = cmd.run()?;
        let text = outcome.report.render(common.format);
        match &common.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
            }
        }
        match outcome.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    };
    match threads(cmd)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.into()))?
            .install(run),
        None => run(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(1),
            }
        }
    }
}
