//! `fibar`: event-camera reconstruction, synthesis, calibration and benchmarks.

mod cmd;
mod common;
mod failure;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "fibar", version, about = "Filter-based image reconstruction from event-camera streams")]
#[command(after_help = "Exit codes: 0 ok, 2 bad arguments, 3 malformed input, 4 runtime failure.\nSet FIBAR_LOG (e.g. info, debug) for log output.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct frames from an event file
    Reconstruct(cmd::reconstruct::Args),
    /// Generate a synthetic event stream from an ideal sensor
    Synth(cmd::synth::Args),
    /// Estimate relative contrast thresholds from a calibration recording
    Calib(cmd::calib::Args),
    /// Measure per-stage throughput
    Bench(cmd::bench::Args),
    /// Print the filter's magnitude response
    Bode(cmd::bode::Args),
    /// Trace the filter state of a single pixel
    Trace(cmd::trace::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIBAR_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reconstruct(a) => cmd::reconstruct::run(a),
        Command::Synth(a) => cmd::synth::run(a),
        Command::Calib(a) => cmd::calib::run(a),
        Command::Bench(a) => cmd::bench::run(a),
        Command::Bode(a) => cmd::bode::run(a),
        Command::Trace(a) => cmd::trace::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
