//! Batch front door: load an experiment config, dispatch to the library,
//! and emit audit-ready JSON plus tidy CSV tables.
//!
//! One config, one run, deterministic outputs: rerunning the same config
//! (same seed, any `--threads`) reproduces every numeric output byte for
//! byte. Exit codes: 0 success, 2 schema violation, 3 regime error,
//! 4 resource budget exceeded, 1 other failures.

mod config;
mod error;
mod runner;

use clap::Parser;
use config::Experiment;
use error::CliError;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "perpetua", version, about = "Affine stochastic recursion laboratory")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of simulate/markov payloads.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trajectory-level parallelism. Must not change any
    /// numeric output.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let start = Instant::now();
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    }

    let raw = fs::read(&args.config)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", args.config.display())))?;
    let experiment: Experiment = serde_json::from_slice(&raw)?;
    let config_sha256 = hex::encode(Sha256::digest(&raw));

    fs::create_dir_all(&args.out)?;
    let output = runner::run_mode(&experiment.mode, &args.out, args.seed)?;

    let result = json!({
        "name": experiment.name,
        "mode": experiment.mode.name(),
        "results": output.results,
        "artifacts": output.artifacts,
        "provenance": {
            "config_sha256": config_sha256,
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "seed_override": args.seed,
            "threads": args.threads,
            "wall_ms": start.elapsed().as_millis() as u64,
        },
    });
    fs::write(
        args.out.join("result.json"),
        serde_json::to_string_pretty(&result).expect("serializable result") + "\n",
    )?;
    Ok(())
}
