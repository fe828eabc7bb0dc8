use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otto_cli::{cmd_dry_run, cmd_run, cmd_sweep, cmd_validate, exit, Options};

/// Quantum-trajectory simulation of a continuously measured optomechanical
/// Otto engine.
///
/// Exit codes: 0 success, 1 failed checks or other errors, 2 configuration
/// error, 3 integrator failure, 4 I/O error. The worker count is read from
/// OTTO_WORKERS (default: all cores).
#[derive(Parser)]
#[command(name = "otto", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run one ensemble.
    Run(Flags),
    /// Run every scheme and measurement strength of sweep.schemes x sweep.lambdas.
    Sweep(Flags),
    /// Run fast oracle and invariant checks.
    Validate(Flags),
    /// Resolve the configuration and write the manifest and empty CSVs.
    DryRun(Flags),
}

#[derive(Args)]
struct Flags {
    /// Configuration file (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Use 2000 trajectories.
    #[arg(long)]
    quick: bool,
    /// Record populations at every integration step.
    #[arg(long)]
    full_series: bool,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl From<Flags> for Options {
    fn from(f: Flags) -> Self {
        Options {
            config: f.config,
            out: f.out,
            seed: f.seed,
            quick: f.quick,
            full_series: f.full_series,
            overrides: f.overrides,
            workers: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.verb {
        Verb::Run(f) => cmd_run(&f.into()).map(|dir| {
            eprintln!("wrote {}", dir.display());
            exit::SUCCESS
        }),
        Verb::Sweep(f) => cmd_sweep(&f.into()).map(|dir| {
            eprintln!("wrote {}", dir.display());
            exit::SUCCESS
        }),
        Verb::DryRun(f) => cmd_dry_run(&f.into()).map(|dir| {
            eprintln!("wrote {}", dir.display());
            exit::SUCCESS
        }),
        Verb::Validate(f) => cmd_validate(&f.into()).map(|checks| {
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                exit::SUCCESS
            } else {
                exit::OTHER
            }
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
