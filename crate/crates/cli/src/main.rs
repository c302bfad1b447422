//! `sram6t` command-line driver.
//!
//! Exit status: 0 success, 1 output I/O error, 2 configuration error,
//! 3 solver non-convergence, 4 functional failure of the cell (outputs are
//! still written).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sram6t::config::RunConfig;

use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "sram6t", version, about = "6T SRAM bit-cell characterization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stability margins, leakage, SER and timing of the configured cell.
    Characterize,
    /// Area, margins, SER, power and timing over the cell-ratio grid.
    SweepCr,
    /// RSNM and SRRV of the configured cell over the word-line grid.
    SweepVwl,
    /// Monte Carlo distributions under threshold mismatch.
    Montecarlo,
    /// Re-run the calibration and write a defaults file.
    Calibrate,
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML configuration; shipped defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding `montecarlo.seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Monte Carlo trial count, overriding `montecarlo.trials`.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Worker threads, overriding `montecarlo.threads`.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

fn load(flags: &Flags) -> Result<RunConfig, Failure> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &flags.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = flags.seed {
        cfg.montecarlo.seed = Some(seed);
    }
    if let Some(trials) = flags.trials {
        cfg.montecarlo.trials = trials;
    }
    if let Some(threads) = flags.threads {
        cfg.montecarlo.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(&cli.flags)?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Failure::Io(format!("{}: {e}", cfg.output.dir.display())))?;
    match cli.command {
        Command::Characterize => commands::characterize(&cfg),
        Command::SweepCr => commands::sweep_cr(&cfg),
        Command::SweepVwl => commands::sweep_vwl(&cfg),
        Command::Montecarlo => commands::montecarlo(&cfg),
        Command::Calibrate => commands::calibrate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
