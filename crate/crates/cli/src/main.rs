//! `omp`: streaming anomaly detection from the command line.

mod args;
mod bench;
mod detect;
mod eval;
mod output;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "omp",
    version,
    about = "Training-free streaming anomaly detection with the online matrix profile"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Judge every point of a series and print one record per timestamp.
    Detect(detect::DetectArgs),
    /// Detect on labeled series and report delay-adjusted precision, recall and F1.
    Eval(eval::EvalArgs),
    /// Time cached detection against detection over the whole history.
    Bench(bench::BenchArgs),
    /// Write a synthetic labeled series.
    Synth(synth::SynthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(a) => detect::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Synth(a) => synth::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
