//! `palmtex` command-line tool.

mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use palmtex_core::dataset::ImageFormat;
use palmtex_core::{ClassifierKind, FeatureConfig, Offset, WeightMode};

#[derive(Parser, Debug)]
#[command(
    name = "palmtex",
    version,
    about = "Multispectral palmprint texture features and identification"
)]
struct Cli {
    /// Worker threads (defaults to the number of logical CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract one 14×M feature matrix per image into a feature archive.
    Extract(ExtractArgs),
    /// Enroll every person of a dataset and write a template archive.
    Train(TrainArgs),
    /// Run the train-fraction × classifier × weighting grid and write a report.
    Evaluate(EvaluateArgs),
    /// Identify one four-spectrum sample against a template archive.
    Identify(IdentifyArgs),
    /// Generate a synthetic dataset on disk.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
struct FeatureArgs {
    /// Side length of the square blocks each image is tiled into.
    #[arg(long, default_value_t = 16)]
    block_size: usize,
    /// Gray-level quantization step.
    #[arg(long, default_value_t = 8)]
    quant_step: u32,
    /// Co-occurrence offset as `DX,DY` (column, row).
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    offset: Offset,
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        FeatureConfig {
            block_size: self.block_size,
            quant_step: self.quant_step,
            offset: self.offset,
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false, id = "source")]
struct SourceArgs {
    /// Dataset root directory (with `manifest.toml` or the default layout).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Use an in-memory synthetic dataset instead of files.
    #[arg(long)]
    synth: bool,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Required image side length; 0 accepts any size.
    #[arg(long, default_value_t = 128)]
    image_size: usize,
    /// Persons in the synthetic dataset.
    #[arg(long, default_value_t = 50)]
    persons: usize,
    /// Seed of the synthetic dataset.
    #[arg(long, default_value_t = 2016)]
    synth_seed: u64,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Input images (PNG or PGM, 8-bit grayscale).
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Output feature archive.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Enroll the first M samples of each person (default: all).
    #[arg(long)]
    train_count: Option<usize>,
    /// Feature weighting.
    #[arg(long, default_value = "uniform")]
    weights: WeightMode,
    /// Output template archive.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SchemeArg {
    /// MDC on circular-adjacent folds, WMV on seeded random repeats.
    Protocol,
    /// Circular-adjacent folds for every classifier.
    Adjacent,
    /// Seeded random repeats for every classifier.
    Random,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Training samples per person; repeat or comma-separate (default 4..=10).
    #[arg(long, value_delimiter = ',')]
    train_count: Vec<usize>,
    /// Restrict to one classifier (default: both).
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    /// Restrict to one weighting (default: both).
    #[arg(long)]
    weights: Option<WeightMode>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Protocol)]
    scheme: SchemeArg,
    /// Random repeats per train count.
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Seed of the random splits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes `<out>.json` and `<out>.csv`.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write long-form accuracy series for plotting.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    /// Template archive written by `train`.
    #[arg(long)]
    templates: PathBuf,
    #[arg(long)]
    red: Option<PathBuf>,
    #[arg(long)]
    green: Option<PathBuf>,
    #[arg(long)]
    blue: Option<PathBuf>,
    #[arg(long)]
    nir: Option<PathBuf>,
    #[arg(long, default_value = "wmv")]
    classifier: ClassifierKind,
    /// Number of ranked candidates to print.
    #[arg(long, default_value_t = 5)]
    top: usize,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output dataset root.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    persons: usize,
    #[arg(long, default_value_t = 12)]
    samples: usize,
    #[arg(long, default_value_t = 128)]
    image_size: usize,
    #[arg(long, default_value_t = 2016)]
    seed: u64,
    /// Per-pixel noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value = "png")]
    format: ImageFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Extract(a) => cmd::extract(a),
        Command::Train(a) => cmd::train(a),
        Command::Evaluate(a) => cmd::evaluate(a),
        Command::Identify(a) => cmd::identify(a),
        Command::Synth(a) => cmd::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
