//! Flat key-value run configuration.
//!
//! Every key has a default; a config file only lists the keys it wants to
//! change. Lines are `key = value`, `#` starts a comment, blank lines are
//! skipped, unknown keys are rejected.
//!
//! ```text
//! # Extraction
//! mask_threshold     = 0.05          # fundus-disc threshold in (0, 1)
//! mask_all_metrics   = false         # restrict stat/grad metrics to the disc
//! tenengrad_tau      = auto          # 'auto' (75th percentile) or a number
//! frangi_scales      = 1, 2, 4, 8    # ascending Gaussian scales in px
//! frangi_beta        = 0.5
//! frangi_c           = 0.058823529411764705
//! frangi_dark_vessels = true
//! frangi_downscale   = 1             # >= 2 computes vesselness downscaled
//! wavelet_families   = db7, db8, bior15, haar
//!
//! # Training
//! seed          = 17
//! split         = subject            # or 'image'
//! test_fraction = 0.25
//! cv_folds      = 5                  # logreg_cv lambda selection
//! trees         = 100                # random_forest size
//! svm_c         = 1.0                # SMO box constraint
//!
//! # Execution
//! workers = 1
//! ```

use std::fmt::Debug;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use fundus_iq::features::ExtractionOptions;
use fundus_iq::ml::SplitMode;
use fundus_iq::vessel::FrangiParams;
use fundus_iq::wavelet::WaveletFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub mask_threshold: f64,
    pub mask_all_metrics: bool,
    /// `None` selects the automatic per-image percentile threshold.
    pub tenengrad_tau: Option<f64>,
    pub frangi_scales: Vec<f64>,
    pub frangi_beta: f64,
    pub frangi_c: f64,
    pub frangi_dark_vessels: bool,
    pub frangi_downscale: usize,
    pub wavelet_families: Vec<WaveletFamily>,
    pub seed: u64,
    pub split: SplitMode,
    pub test_fraction: f64,
    pub cv_folds: usize,
    pub trees: usize,
    pub svm_c: f64,
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        // extraction defaults live in the library; mirror them so there is
        // a single source of truth
        let opts = ExtractionOptions::default();
        Config {
            mask_threshold: opts.mask_threshold,
            mask_all_metrics: opts.mask_all_metrics,
            tenengrad_tau: opts.tenengrad_tau,
            frangi_scales: opts.frangi.scales,
            frangi_beta: opts.frangi.beta,
            frangi_c: opts.frangi.c,
            frangi_dark_vessels: opts.frangi.dark_vessels,
            frangi_downscale: opts.frangi_downscale,
            wavelet_families: opts.families,
            seed: 17,
            split: SplitMode::Subject,
            test_fraction: 0.25,
            cv_folds: 5,
            trees: fundus_iq::ml::DEFAULT_TREES,
            svm_c: fundus_iq::ml::DEFAULT_PENALTY,
            workers: 1,
        }
    }
}

impl Config {
    pub fn extraction_options(&self) -> ExtractionOptions {
        ExtractionOptions {
            mask_threshold: self.mask_threshold,
            mask_all_metrics: self.mask_all_metrics,
            tenengrad_tau: self.tenengrad_tau,
            frangi: FrangiParams {
                scales: self.frangi_scales.clone(),
                beta: self.frangi_beta,
                c: self.frangi_c,
                dark_vessels: self.frangi_dark_vessels,
            },
            frangi_downscale: self.frangi_downscale,
            families: self.wavelet_families.clone(),
        }
    }
}

pub fn parse_split(value: &str) -> Result<SplitMode> {
    match value {
        "subject" => Ok(SplitMode::Subject),
        "image" => Ok(SplitMode::Image),
        other => bail!("split must be 'subject' or 'image', got '{other}'"),
    }
}

fn parse_scalar<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Debug,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("config key '{key}': cannot parse '{value}': {e:?}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => bail!("config key '{key}': expected true or false, got '{other}'"),
    }
}

fn parse_scales(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_scalar("frangi_scales", s.trim()))
        .collect()
}

fn parse_families(value: &str) -> Result<Vec<WaveletFamily>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| WaveletFamily::from_name(s).with_context(|| format!("unknown wavelet family '{s}'")))
        .collect()
}

/// Parses config text over the defaults. Later lines win.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected 'key = value'", index + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mask_threshold" => cfg.mask_threshold = parse_scalar(key, value)?,
            "mask_all_metrics" => cfg.mask_all_metrics = parse_bool(key, value)?,
            "tenengrad_tau" => {
                cfg.tenengrad_tau =
                    if value == "auto" { None } else { Some(parse_scalar(key, value)?) }
            }
            "frangi_scales" => cfg.frangi_scales = parse_scales(value)?,
            "frangi_beta" => cfg.frangi_beta = parse_scalar(key, value)?,
            "frangi_c" => cfg.frangi_c = parse_scalar(key, value)?,
            "frangi_dark_vessels" => cfg.frangi_dark_vessels = parse_bool(key, value)?,
            "frangi_downscale" => cfg.frangi_downscale = parse_scalar(key, value)?,
            "wavelet_families" => cfg.wavelet_families = parse_families(value)?,
            "seed" => cfg.seed = parse_scalar(key, value)?,
            "split" => cfg.split = parse_split(value)?,
            "test_fraction" => cfg.test_fraction = parse_scalar(key, value)?,
            "cv_folds" => cfg.cv_folds = parse_scalar(key, value)?,
            "trees" => cfg.trees = parse_scalar(key, value)?,
            "svm_c" => cfg.svm_c = parse_scalar(key, value)?,
            "workers" => cfg.workers = parse_scalar(key, value)?,
            other => bail!("unknown config key '{other}'"),
        }
    }
    if cfg.frangi_downscale == 0 {
        bail!("frangi_downscale must be at least 1");
    }
    if cfg.workers == 0 {
        bail!("workers must be at least 1");
    }
    Ok(cfg)
}

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in config file {}", p.display()))
        }
    }
}
