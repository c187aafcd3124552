//! Command-line driver: simulated sweeps, offline frame analysis,
//! critical-range detection, and overlay plots.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags, bad
//! config, bad input data), 2 on I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;

use commands::CliError;

#[derive(Parser)]
#[command(
    name = "darksweep",
    version,
    about = "Characterise simulated CMOS sensor row noise under power-supply ripple"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a characterisation sweep from a run config
    Sweep {
        /// Run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides out_dir from the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Repeat the sweep N times with distinct run seeds and overlay
        /// the curves
        #[arg(long, default_value_t = 1)]
        repeat: u32,
        /// Override the run seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Write every captured frame as PGM + sidecar under
        /// <out>/frames (first run only)
        #[arg(long)]
        dump_frames: bool,
        /// Threshold multiplier for critical-range detection
        #[arg(long, default_value_t = darksweep_core::sweep::DEFAULT_CRITICAL_K)]
        k: f64,
        /// Logarithmic frequency axis in the plot
        #[arg(long)]
        log_x: bool,
    },
    /// Rebuild a characterisation curve from a directory of captured
    /// frames (PGM + sidecar)
    Analyze {
        /// Directory of .pgm frames with .toml sidecars
        #[arg(long)]
        frames: PathBuf,
        /// Output curve CSV path
        #[arg(long)]
        out: PathBuf,
        /// Analysis plane (g1 or luma)
        #[arg(long, default_value = "g1")]
        plane: String,
    },
    /// Detect critical frequency ranges in a curve CSV
    Detect {
        /// Curve CSV
        #[arg(long)]
        curve: PathBuf,
        /// Threshold multiplier
        #[arg(long, default_value_t = darksweep_core::sweep::DEFAULT_CRITICAL_K)]
        k: f64,
    },
    /// Overlay one or more curve CSVs as an SVG plot
    Plot {
        /// Curve CSV files
        #[arg(required = true)]
        curves: Vec<PathBuf>,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
        /// Logarithmic frequency axis
        #[arg(long)]
        log_x: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Sweep {
            config,
            out,
            repeat,
            seed,
            dump_frames,
            k,
            log_x,
        } => commands::cmd_sweep(&config, out.as_deref(), repeat, seed, dump_frames, k, log_x),
        Command::Analyze { frames, out, plane } => commands::cmd_analyze(&frames, &out, &plane),
        Command::Detect { curve, k } => commands::cmd_detect(&curve, k),
        Command::Plot { curves, out, log_x } => commands::cmd_plot(&curves, &out, log_x),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
