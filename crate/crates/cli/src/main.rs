use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use randesign::harness::{run_command, Command};
use randesign::Error;

#[derive(Parser)]
#[command(
    name = "randesign",
    version,
    about = "Randomized optimal design experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a relaxed E-, G- or uniform design on a pool.
    Solve(Io),
    /// Realize a design by i.i.d. sampling and score the draws.
    Sample(Io),
    /// Evaluate a named concentration bound.
    Bounds(Io),
    /// Monte Carlo check of a tail bound.
    Validate(Io),
    /// Smallest-eigenvalue comparison of E strategies.
    ExpE(Io),
    /// Best-arm identification campaign.
    ExpBai(Io),
}

#[derive(Args)]
struct Io {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (command, io) = match cli.command {
        Cmd::Solve(io) => (Command::Solve, io),
        Cmd::Sample(io) => (Command::Sample, io),
        Cmd::Bounds(io) => (Command::Bounds, io),
        Cmd::Validate(io) => (Command::Validate, io),
        Cmd::ExpE(io) => (Command::ExpE, io),
        Cmd::ExpBai(io) => (Command::ExpBai, io),
    };
    let config = std::fs::read_to_string(&io.config)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", io.config.display())))?;
    let text = match run_command(command, &config, io.seed) {
        Ok(text) => text,
        Err(Error::Usage(msg)) => return Err(Failure::Usage(msg)),
        Err(e) => return Err(Failure::Runtime(e.into())),
    };
    write_output(io.out.as_deref(), &text).map_err(Failure::Runtime)
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
