//! Command-line front end.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use manifest::{sha256_file, FileDigest, RunManifest, MANIFEST_NAME};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "herd-unwrap", version, about = "Unwrap aerial keypoint tracks into ground coordinates and measure herd behavior")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unwrap by chaining frame-to-frame rigid transforms.
    UnwrapReg(UnwrapRegArgs),
    /// Unwrap by casting pixels onto the ground plane from camera poses.
    UnwrapSfm(UnwrapSfmArgs),
    /// Landmark dispersion report.
    EvalTrees(EvalTreesArgs),
    /// Herd behavior metrics.
    Metrics(MetricsArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Run every unwrapping method and tabulate landmark dispersion.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Yflip,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotationArg {
    Slerp,
    Inplane,
}

#[derive(Debug, Clone, Args)]
pub struct LandmarkFilterArgs {
    /// Landmark tracks need more samples than this.
    #[arg(long, default_value_t = 400)]
    pub min_samples: usize,
    /// Largest consecutive-frame landmark jump, pixels.
    #[arg(long, default_value_t = 10.0)]
    pub max_jump: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CleaningArgs {
    #[arg(long, default_value_t = 0.9)]
    pub confidence: f64,
    /// Largest consecutive-frame keypoint jump, body lengths.
    #[arg(long, default_value_t = 2.0)]
    pub jump_factor: f64,
}

#[derive(Debug, Args)]
pub struct UnwrapRegArgs {
    #[arg(long)]
    pub tracks: PathBuf,
    /// Chain CSV; estimated from --landmarks when absent.
    #[arg(long, required_unless_present = "landmarks")]
    pub chain: Option<PathBuf>,
    /// Landmark image tracks used to estimate the chain.
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AxisArg::Yflip)]
    pub q: AxisArg,
    /// Fewest shared landmarks for a frame pair to get a link.
    #[arg(long, default_value_t = 2)]
    pub min_pairs: usize,
    #[command(flatten)]
    pub filter: LandmarkFilterArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the estimated chain here.
    #[arg(long)]
    pub chain_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UnwrapSfmArgs {
    #[arg(long)]
    pub tracks: PathBuf,
    /// Reconstruction JSON or pose CSV.
    #[arg(long)]
    pub poses: PathBuf,
    /// Required with a pose CSV.
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    /// Ground points CSV; required with a pose CSV, overrides the reconstruction's points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RotationArg::Slerp)]
    pub rotation: RotationArg,
    #[arg(long, required_if_eq("rotation", "inplane"))]
    pub deltas: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalTreesArgs {
    /// Unwrapped tracks carrying landmark points.
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long, conflicts_with = "animals")]
    pub body_length: Option<f64>,
    /// Unwrapped animal tracks for the body length; defaults to the head/tail entries of --world.
    #[arg(long)]
    pub animals: Option<PathBuf>,
    #[command(flatten)]
    pub cleaning: CleaningArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub world: PathBuf,
    /// Frame rate; defaults to the track file's.
    #[arg(long)]
    pub fps: Option<f64>,
    #[command(flatten)]
    pub cleaning: CleaningArgs,
    /// Body vector length outlier bound, in standard deviations.
    #[arg(long, default_value_t = 2.0)]
    pub sigma_factor: f64,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Frames per bin.
    #[arg(long, default_value_t = 30)]
    pub bin: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene JSON; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Image tracks with animals and landmark points.
    #[arg(long)]
    pub tracks: PathBuf,
    /// Chain CSV for the registration method; estimated from the landmarks when absent.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Keyframe reconstruction JSON or pose CSV.
    #[arg(long)]
    pub keyframes: PathBuf,
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub deltas: PathBuf,
    #[arg(long, value_enum, default_value_t = AxisArg::Yflip)]
    pub q: AxisArg,
    #[arg(long, default_value_t = 2)]
    pub min_pairs: usize,
    #[command(flatten)]
    pub filter: LandmarkFilterArgs,
    #[command(flatten)]
    pub cleaning: CleaningArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Messages go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build();
        match pool {
            Ok(pool) => pool.install(|| commands::dispatch(&cli.command)),
            Err(e) => Err(crate::Error::Config(format!("cannot start {} worker threads: {e}", cli.threads))),
        }
    }));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
        Err(_) => {
            eprintln!("internal error: the command panicked");
            EXIT_INTERNAL
        }
    }
}
