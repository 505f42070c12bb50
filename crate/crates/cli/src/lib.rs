//! `motor-dae`: fetch, prepare, corrupt, train, denoise and evaluate.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | other failure |
//! | 2 | bad arguments or configuration |
//! | 10, 11, 12 | fetch: network, checksum, extraction |
//! | 20 | prepare: a file failed or no input files |
//! | 21 | corrupt: a file failed |
//! | 30, 31 | train: non-finite loss, empty split |
//! | 40, 41 | denoise: checkpoint, IO |
//! | 50 | evaluate: empty test split |

mod commands;
pub mod config;
pub mod manifest;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NETWORK: i32 = 10;
pub const EXIT_CHECKSUM: i32 = 11;
pub const EXIT_EXTRACTION: i32 = 12;
pub const EXIT_PREPARE: i32 = 20;
pub const EXIT_CORRUPT: i32 = 21;
pub const EXIT_NON_FINITE: i32 = 30;
pub const EXIT_EMPTY_SPLIT: i32 = 31;
pub const EXIT_CHECKPOINT: i32 = 40;
pub const EXIT_DENOISE_IO: i32 = 41;
pub const EXIT_EMPTY_TEST: i32 = 50;

/// A command failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "motor-dae",
    version,
    about = "Denoising autoencoder pipeline for induction-motor sounds",
    after_help = "Any config field can be overridden with a dotted flag, e.g. --train.seed 3 or --noise.kind=blue."
)]
pub struct Cli {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Sets the split, noise, training and synthesis seeds at once.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// Category to train and evaluate on, e.g. `normal` or `all`.
    #[arg(long, global = true)]
    pub category: Option<String>,
    /// Full-size architecture and 16384-sample windows.
    #[arg(long, global = true)]
    pub full_scale: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download and unpack a dataset archive.
    Fetch(FetchArgs),
    /// Convert a tree of CSV recordings into mono WAV files.
    Prepare(PrepareArgs),
    /// Create noisy copies of prepared WAV files.
    Corrupt(CorruptArgs),
    /// Train the autoencoder on clean/noisy pairs.
    Train(TrainArgs),
    /// Denoise one WAV file with a trained checkpoint.
    Denoise(DenoiseArgs),
    /// Score the test split and write a report.
    Evaluate(EvaluateArgs),
    /// Write a synthetic CSV corpus in the dataset layout.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub url: String,
    /// Defaults to the configured `dataset_dir`.
    #[arg(long)]
    pub dest: Option<PathBuf>,
    /// Expected SHA-256 of the archive, hex encoded.
    #[arg(long)]
    pub checksum: Option<String>,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub dataset_dir: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub mic_column: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Manifest written by `prepare`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Pairs manifest written by `corrupt`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Checkpoint manifest to write; weights go to the `.bin` beside it.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write WAVs and spectrograms of clean, noisy and denoised signals here.
    #[arg(long, requires = "clean")]
    pub bundle: Option<PathBuf>,
    /// Clean reference for `--bundle`.
    #[arg(long)]
    pub clean: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Split written by `train`; defaults to `split.json` beside the model.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Defaults to the configured `dataset_dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 48)]
    pub count: usize,
    #[arg(long, default_value_t = 2.0)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 40.0)]
    pub min_hz: f64,
    #[arg(long, default_value_t = 70.0)]
    pub max_hz: f64,
    /// Dataset subdirectory, e.g. `normal` or `horizontal-misalignment/1.0mm`.
    #[arg(long, default_value = "normal")]
    pub subdir: String,
}

fn init_logging(verbose: bool) {
    let level = if verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("MOTOR_DAE_LOG")
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let (args, mut overrides) = match config::extract_overrides(args) {
        Ok(v) => v,
        Err(f) => {
            eprintln!("error: {f}");
            return f.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    if let Some(c) = &cli.category {
        overrides.insert(0, ("category".to_string(), c.clone()));
    }
    let sources = config::ConfigSources {
        file: cli.config.as_deref(),
        full_scale: cli.full_scale,
        seed: cli.seed,
        overrides: &overrides,
    };
    let result = config::load_config(&sources).and_then(|cfg| commands::dispatch(&cli, &cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}
