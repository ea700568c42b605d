//! Experiment runner: reads a JSON sweep config, simulates every
//! (scheduler, capacity, seed) tuple against a shared infinite-capacity
//! reference, and writes one CSV row per tuple.
//!
//! Exit codes: 0 on success, 2 on a config error, 3 on a runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use voisim::experiment::{run_experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "voisim", version, about = "VoI stream-scheduling experiment runner")]
struct Args {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path; overrides `output_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a per-event transport trace next to the output CSV.
    #[arg(long)]
    trace: bool,

    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let raw = match std::fs::read_to_string(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let config: ExperimentConfig = match serde_json::from_str(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };

    let out_path = match args
        .out
        .clone()
        .or_else(|| config.output_path.as_ref().map(PathBuf::from))
    {
        Some(p) => p,
        None => {
            eprintln!("no output path: set output_path in the config or pass --out");
            return ExitCode::from(2);
        }
    };

    let started = std::time::Instant::now();
    let output = match run_experiment(&config, args.trace) {
        Ok(o) => o,
        Err(e @ voisim::Error::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("experiment failed: {e}");
            return ExitCode::from(3);
        }
    };

    if let Err(e) = std::fs::write(&out_path, &output.csv) {
        eprintln!("cannot write {}: {e}", out_path.display());
        return ExitCode::from(3);
    }
    if let Some(trace_csv) = &output.trace_csv {
        let trace_path = out_path.with_extension("trace.csv");
        if let Err(e) = std::fs::write(&trace_path, trace_csv) {
            eprintln!("cannot write {}: {e}", trace_path.display());
            return ExitCode::from(3);
        }
        if !args.quiet {
            println!("wrote event trace to {}", trace_path.display());
        }
    }
    if !args.quiet {
        println!(
            "wrote {} rows to {} in {:.1?}",
            output.rows.len(),
            out_path.display(),
            started.elapsed()
        );
    }
    ExitCode::SUCCESS
}
