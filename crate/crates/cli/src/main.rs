//! `foresight` — closed-loop, open-loop and ablation runs over the toy
//! driving world, driven by the plan-imagine-refine loop.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use config::{CommonFlags, RunConfig};
use foresight_core::world::suite::{DEFAULT_PER_CATEGORY, DEFAULT_SUITE_SEED};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "foresight",
    version,
    about = "Plan-imagine-refine driving loop: scenario runs and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scripted scenarios closed-loop and write outcome and summary reports.
    ClosedLoop {
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Evaluate open-loop planning (L2, collision rate) on logged samples.
    OpenLoop {
        #[command(flatten)]
        flags: CommonFlags,
        /// JSON dataset of logged samples; default: the bundled generated set.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Sample count when generating the default dataset.
        #[arg(long)]
        samples: Option<usize>,
        /// Report the error at each horizon instead of the prefix average.
        #[arg(long)]
        l2_at_horizon: bool,
    },
    /// Run the early-stop / trajectory-selection ablation grids.
    Ablate {
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Write the procedurally generated scenario suite as JSON files.
    GenSuite {
        /// Output directory for the scenario files.
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUITE_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_PER_CATEGORY)]
        per_category: usize,
    },
}

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::ClosedLoop { flags } => {
            let cfg = RunConfig::resolve(&flags, None, None, false)?;
            commands::cmd_closed_loop(&cfg)
        }
        Command::OpenLoop {
            flags,
            dataset,
            samples,
            l2_at_horizon,
        } => {
            let cfg = RunConfig::resolve(&flags, dataset.as_deref(), samples, l2_at_horizon)?;
            commands::cmd_open_loop(&cfg)
        }
        Command::Ablate { flags } => {
            let cfg = RunConfig::resolve(&flags, None, None, false)?;
            commands::cmd_ablate(&cfg)
        }
        Command::GenSuite {
            out,
            seed,
            per_category,
        } => commands::cmd_gen_suite(&out, seed, per_category),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
