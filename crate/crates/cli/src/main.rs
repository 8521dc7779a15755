//! `gaborface`: batch driver for detection, landmarking, feature extraction,
//! training and evaluation.

mod commands;
mod config;
mod draw;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaborface::features::FeatureKind;
use gaborface::recognizer::SplitRatio;

/// Exit code for usage and input errors.
const EXIT_INPUT: u8 = 1;
/// Exit code when no face or no facial feature could be found.
const EXIT_DETECTION: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gaborface",
    version,
    about = "Face detection and recognition with fuzzy skin segmentation and Gabor jets"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Flags override config file values.
#[derive(Debug, Clone, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "gaborface-out")]
    out: PathBuf,

    /// Base seed for splits, training and toy data.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Gabor orientation count.
    #[arg(long, global = true, value_parser = parse_orientations)]
    orientations: Option<usize>,

    /// Feature kind.
    #[arg(long, global = true)]
    features: Option<FeatureKind>,

    /// Restrict evaluation to one split ratio.
    #[arg(long, global = true)]
    split: Option<SplitRatio>,

    /// Random splits averaged per evaluation cell.
    #[arg(long, global = true)]
    combinations: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

fn parse_orientations(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    gaborface::features::default_orientation_subset(n).map_err(|e| e.to_string())?;
    Ok(n)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate the face: skin mask, edge map, box and 50x50 chip.
    Detect { image: PathBuf },
    /// Detect and extract the ten fiducial points.
    Landmarks { image: PathBuf },
    /// Feature CSV for a dataset directory or a single image.
    Features { input: PathBuf },
    /// Train a model from a feature CSV or a dataset directory.
    Train { input: PathBuf },
    /// Recognition-rate sweep over feature kinds, bank sizes and split ratios.
    Eval { dataset: PathBuf },
    /// Draw the face box and landmarks on the input image.
    Annotate { image: PathBuf },
    /// Write the synthetic toy-face dataset.
    GenToyset {
        /// Person count (default 5).
        #[arg(long)]
        persons: Option<usize>,
        /// Images per person (default 20).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Write the real parts of the Gabor kernels as normalized PNGs.
    Kernels,
    /// Identify the face in an image with a trained model.
    Identify { model: PathBuf, image: PathBuf },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let detection = err
        .chain()
        .filter_map(|e| e.downcast_ref::<gaborface::Error>())
        .any(gaborface::Error::is_detection_failure);
    if detection {
        EXIT_DETECTION
    } else {
        EXIT_INPUT
    }
}

/// The error chain joined by `: `, skipping causes the previous message
/// already quotes.
fn describe(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !parts.last().is_some_and(|prev| prev.contains(&msg)) {
            parts.push(msg);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(&cli.global, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
