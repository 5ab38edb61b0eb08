//! Batch front end: extract features over a manifest, project clusters,
//! train and apply triage models.
//!
//! Exit codes: 0 success, 1 any error (including per-image extraction
//! failures), 2 from `score` when at least one image is blurry.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod cmd_dump;
mod cmd_extract;
mod cmd_pca;
mod cmd_score;
mod cmd_train;
mod config;
mod feature_csv;
mod manifest;
mod workers;

use config::{load_config, parse_split, Config};

#[derive(Parser)]
#[command(
    name = "fundus-iq",
    version,
    about = "Sharpness features and blur triage for retinal fundus images"
)]
struct Cli {
    /// Flat key-value config file; flags below override it
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed for splitting and training
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concurrent image workers
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Restrict statistical and gradient metrics to the fundus disc
    #[arg(long, global = true)]
    mask_all_metrics: bool,
    /// Train/test boundary: between subjects or between images
    #[arg(long, global = true, value_parser = ["subject", "image"])]
    split: Option<String>,
    /// Block-average factor for the vesselness map (>= 2 enables)
    #[arg(long, global = true)]
    frangi_downscale: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract all features for every image in a manifest into a CSV
    Extract {
        /// CSV with columns path,subject,label
        manifest: PathBuf,
        /// Feature CSV to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Project one feature cluster onto its first two principal components
    Pca {
        /// Feature CSV from `extract`
        features: PathBuf,
        #[arg(long, value_parser = ["statistical", "gradient", "wavelet"])]
        cluster: String,
        /// Projection CSV to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on extracted features and evaluate the held-out split
    Train {
        /// Feature CSV from `extract`; only labeled rows are used
        features: PathBuf,
        #[arg(long, value_parser = ["logreg_cv", "random_forest", "svm_sigmoid"])]
        model: String,
        /// Model file to write
        #[arg(long)]
        out: PathBuf,
        /// Report path; defaults to the model path with .report.json
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score images with a trained model; exit 2 if any verdict is blurry
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Write the score CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the intermediate maps and feature row for one image
    #[command(name = "dump-debug")]
    DumpDebug {
        image: PathBuf,
        /// Output directory for the PNG maps and features.csv
        #[arg(long)]
        out: PathBuf,
    },
}

fn effective_config(cli: &Cli) -> Result<Config> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        anyhow::ensure!(workers > 0, "workers must be at least 1");
        cfg.workers = workers;
    }
    if cli.mask_all_metrics {
        cfg.mask_all_metrics = true;
    }
    if let Some(split) = &cli.split {
        cfg.split = parse_split(split)?;
    }
    if let Some(factor) = cli.frangi_downscale {
        anyhow::ensure!(factor > 0, "frangi_downscale must be at least 1");
        cfg.frangi_downscale = factor;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = effective_config(&cli)?;
    match &cli.command {
        Command::Extract { manifest, out } => {
            let failed = cmd_extract::run(manifest, out, &cfg)?;
            Ok(if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Pca { features, cluster, out } => {
            cmd_pca::run(features, cluster, out, &cfg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Train { features, model, out, report } => {
            cmd_train::run(features, model, out, report.as_deref(), &cfg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Score { model, images, out } => {
            let any_blurry = cmd_score::run(model, images, out.as_deref(), &cfg)?;
            Ok(if any_blurry { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::DumpDebug { image, out } => {
            cmd_dump::run(image, out, &cfg)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // clap's own exit code for usage errors is 2, which this tool reserves
    // for blurry verdicts; remap usage errors to 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
