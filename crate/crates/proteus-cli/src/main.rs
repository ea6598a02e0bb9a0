mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "proteus",
    version,
    about = "Explain unsupervised anomaly detectors with reduced-dimensionality surrogate models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; required by every randomized command
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory
    #[arg(long, global = true, default_value = "proteus-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic benchmark CSVs with gold labels
    Synth,
    /// Fit the configured detector on a CSV and write scores/labels
    Detect,
    /// Run the full pipeline: detect, search the grid, refit, report
    Explain,
    /// Score a fresh CSV with a saved surrogate model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Compare a saved surrogate against detector labels on held-out data
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Column of `data` holding the detector's 0/1 labels
        #[arg(long)]
        detector_label_column: String,
        /// Optional gold-standard column for discovery rates
        #[arg(long)]
        gold_column: Option<String>,
    },
    /// Render a spider anomaly-explanation chart for selected samples
    Chart {
        #[arg(long)]
        model: PathBuf,
        /// Reference CSV (the data the explanation was trained on)
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated sample row indices (0-based)
        #[arg(long)]
        samples: String,
        /// Optional detector scores/labels CSV from `detect`
        #[arg(long)]
        labels_csv: Option<PathBuf>,
    },
    /// Estimation-bias comparison across protocol variants
    BiasExperiment,
}

fn require_seed(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.ok_or_else(|| anyhow::anyhow!("--seed is mandatory for this command"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    }
    let config = RunConfig::load(cli.config.as_deref())?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| anyhow::anyhow!("creating {}: {e}", cli.out.display()))?;

    match cli.command {
        Command::Synth => commands::synth::run(&config, require_seed(cli.seed)?, &cli.out),
        Command::Detect => commands::detect::run(&config, require_seed(cli.seed)?, &cli.out),
        Command::Explain => commands::explain::run(&config, require_seed(cli.seed)?, &cli.out),
        Command::Predict { model, data } => commands::predict::run(&model, &data, &cli.out),
        Command::Evaluate {
            model,
            data,
            detector_label_column,
            gold_column,
        } => commands::evaluate::run(
            &model,
            &data,
            &detector_label_column,
            gold_column.as_deref(),
            &cli.out,
        ),
        Command::Chart {
            model,
            data,
            samples,
            labels_csv,
        } => commands::chart::run(&model, &data, &samples, labels_csv.as_deref(), &cli.out),
        Command::BiasExperiment => {
            commands::bias::run(&config, require_seed(cli.seed)?, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("proteus: {err:#}");
            ExitCode::FAILURE
        }
    }
}
