mod commands;
mod inspect;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semirender::pipeline::{HeatMapMode, Method};

/// Single-image 3D shape reconstruction through PCA subspaces.
///
/// Settings come from `--config` (TOML, `[dataset]` and `[experiment]`
/// sections); command-line flags override the file, which overrides the
/// built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "semirender", version)]
struct Cli {
    /// Worker threads for data generation and loading.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the dataset and training seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the image and shape subspaces on the unlabeled pools.
    Pretrain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Directory receiving image.ssm and shape.ssm.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a mapping on the paired training split.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Directory holding image.ssm and shape.ssm (defaults to --out).
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Reconstruct a paired split and report per-sample RMSE.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Directory holding the subspaces and map_<method>.map (defaults to --out).
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        method: Option<Method>,
        /// `test` or `train`.
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Run all three methods on the same splits and tabulate RMSE.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a shape file (.ply or .voxr) to a PGM depth image.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Yaw in degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        yaw: f64,
        #[arg(long, default_value_t = 32)]
        size: usize,
    },
    /// Per-point error between a predicted and a ground-truth cloud, as PLY.
    Heatmap {
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// `corresponded` or `nearest`.
        #[arg(long, default_value = "corresponded")]
        mode: HeatMapMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a model, shape, image or dataset directory.
    Inspect { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        log::warn!("could not configure thread pool: {e}");
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
