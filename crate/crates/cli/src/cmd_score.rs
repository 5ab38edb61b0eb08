//! `score`: triage images with a persisted model.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::Config;
use crate::workers::ordered_map;
use fundus_iq::features::{extract, feature_names, FEATURE_SCHEMA_VERSION};
use fundus_iq::ml::TrainedModel;

pub const THRESHOLD: f64 = 0.5;

/// Scores every image; returns true when at least one verdict is blurry.
/// Any unreadable image or feature failure aborts the whole run: scoring
/// has no error column, a missing verdict must not look like a pass.
pub fn run(model_path: &Path, images: &[PathBuf], out: Option<&Path>, cfg: &Config) -> Result<bool> {
    let text = std::fs::read_to_string(model_path)
        .with_context(|| format!("cannot read model {}", model_path.display()))?;
    let model = TrainedModel::from_text(&text)
        .with_context(|| format!("cannot parse model {}", model_path.display()))?;
    let names = feature_names(&cfg.wavelet_families);
    model
        .check_schema(FEATURE_SCHEMA_VERSION, &names)
        .context("model/extractor mismatch, refusing to score")?;

    let opts = cfg.extraction_options();
    let rows: Vec<(Vec<f64>, f64)> = ordered_map(images.len(), cfg.workers, |i| {
        let features = fundus_iq::io::load_image(&images[i]).and_then(|rgb| extract(&rgb, &opts))?;
        let score = model.score(&features)?;
        Ok::<_, fundus_iq::Error>((features, score))
    })
    .into_iter()
    .zip(images)
    .map(|(outcome, path)| outcome.with_context(|| format!("scoring {}", path.display())))
    .collect::<Result<_>>()?;

    let mut buf = Vec::new();
    writeln!(buf, "# fundus-iq scores {FEATURE_SCHEMA_VERSION} threshold={THRESHOLD}")?;
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["id".to_string(), "score".to_string(), "verdict".to_string()];
        header.extend(names.iter().cloned());
        writer.write_record(&header)?;
        for (path, (features, score)) in images.iter().zip(&rows) {
            let verdict = if *score >= THRESHOLD { "acceptable" } else { "blurry" };
            let mut record = vec![
                path.display().to_string(),
                format!("{score}"),
                verdict.to_string(),
            ];
            record.extend(features.iter().map(|v| format!("{v}")));
            writer.write_record(&record)?;
        }
        writer.flush()?;
    }
    match out {
        Some(path) => std::fs::write(path, buf)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().write_all(&buf)?,
    }

    Ok(rows.iter().any(|(_, score)| *score < THRESHOLD))
}
