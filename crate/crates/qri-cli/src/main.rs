//! `qri`: config-driven experiments with randomly repeated quantum
//! interactions. Subcommands: `spectrum`, `simulate`, `thermo`, `validate`.
//!
//! Exit codes: 0 success, 2 config error, 3 spectral-gate violation,
//! 4 validation failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, CommandContext};
use config::ExperimentConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "qri",
    version,
    about = "Random repeated-interaction quantum systems: spectra, ergodic simulation, thermodynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory to place output files in (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for trajectory ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Suppress progress lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue tables over an interaction-time sweep, with gate verdicts.
    Spectrum,
    /// Ergodic simulation against the closed-form asymptotic state.
    Simulate,
    /// Energy/entropy production rates and the second-law residual.
    Thermo,
    /// Run acceptance suites (linalg, spin_spin, spin_fermion, ergodic, thermo, all).
    Validate {
        #[arg(default_value = "all")]
        suite: String,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // ignore failure if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { suite } => {
            commands::cmd_validate(suite, cli.seed.unwrap_or(0), cli.out.as_deref(), cli.quiet)
        }
        cmd => {
            let path = cli.config.as_deref().ok_or_else(|| {
                CliError::Config("this command needs --config <path>".into())
            })?;
            let config = ExperimentConfig::from_path(path)?;
            let seed = cli.seed.unwrap_or(config.run.seed);
            let ctx = CommandContext { config, seed, out_dir: cli.out.as_deref(), quiet: cli.quiet };
            match cmd {
                Command::Spectrum => commands::cmd_spectrum(&ctx),
                Command::Simulate => commands::cmd_simulate(&ctx),
                Command::Thermo => commands::cmd_thermo(&ctx),
                Command::Validate { .. } => unreachable!("handled above"),
            }
        }
    }
}
