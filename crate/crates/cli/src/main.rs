//! Command-line driver for the topic modeling, evaluation, and outcome
//! analysis pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 provider error, 4 data
//! error.

mod commands;
mod context;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "topiclens",
    about = "Stance-aware topic modeling over review corpora with outcome analysis",
    version
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true, default_value = "topiclens.toml")]
    config: PathBuf,

    /// Run directory (overrides the config's run_dir).
    #[arg(long, global = true)]
    run_dir: Option<PathBuf>,

    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Force the deterministic offline mock providers.
    #[arg(long, global = true)]
    mock: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract leader passages from the corpus into the passage store.
    Extract,
    /// Run the five pipeline stages for one or all slices.
    Model {
        /// Slice to model: e.g. "top:behavior", or "all".
        #[arg(long, default_value = "all")]
        slice: String,
        /// Integration cluster counts, comma separated (overrides config).
        #[arg(long)]
        n_clusters: Option<String>,
    },
    /// Compute the metric suite over the model checkpoints of a slice.
    Evaluate {
        #[arg(long, default_value = "all")]
        slice: String,
    },
    /// Regress panel outcomes on topic frequencies for a slice.
    Outcomes {
        #[arg(long)]
        slice: String,
        /// Checkpoint to analyze: "split" (default), "named", "reassigned",
        /// or "integrated_T<n>".
        #[arg(long, default_value = "split")]
        stage: String,
    },
    /// Summarize a run; optionally recompute ICC agreement from rating CSVs.
    Report {
        /// Directory of `<metric>.csv` rating files (target_id,judge,human).
        #[arg(long)]
        ratings_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = context::Overrides {
        run_dir: cli.run_dir.clone(),
        seed: cli.seed,
        force_mock: cli.mock,
    };
    let result = match &cli.command {
        Command::Extract => commands::extract::run(&cli.config, &overrides),
        Command::Model { slice, n_clusters } => {
            commands::model::run(&cli.config, &overrides, slice, n_clusters.as_deref())
        }
        Command::Evaluate { slice } => commands::evaluate::run(&cli.config, &overrides, slice),
        Command::Outcomes { slice, stage } => {
            commands::outcomes::run(&cli.config, &overrides, slice, stage)
        }
        Command::Report { ratings_dir } => {
            commands::report::run(&cli.config, &overrides, ratings_dir.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code)
        }
    }
}
