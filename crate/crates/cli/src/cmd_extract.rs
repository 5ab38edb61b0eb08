//! `extract`: manifest in, feature CSV out.

use std::path::Path;

use anyhow::Result;

use crate::config::Config;
use crate::feature_csv::{write_features, FeatureRow};
use crate::manifest::read_manifest;
use crate::workers::ordered_map;
use fundus_iq::features::{extract, feature_names};

/// Returns the number of images that failed. The CSV is written either
/// way; failures occupy their row's error column.
pub fn run(manifest_path: &Path, out: &Path, cfg: &Config) -> Result<usize> {
    let entries = read_manifest(manifest_path)?;
    let names = feature_names(&cfg.wavelet_families);
    let opts = cfg.extraction_options();

    let outcomes = ordered_map(entries.len(), cfg.workers, |i| {
        fundus_iq::io::load_image(Path::new(&entries[i].path))
            .and_then(|rgb| extract(&rgb, &opts))
            .map_err(|e| e.to_string())
    });

    let rows: Vec<FeatureRow> = entries
        .iter()
        .zip(outcomes)
        .map(|(entry, outcome)| FeatureRow {
            id: entry.path.clone(),
            subject: entry.subject.clone(),
            label: entry.label,
            outcome,
        })
        .collect();
    write_features(out, &names, &rows)?;

    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!(
            "warning: {failed} of {} images failed; see the error column in {}",
            rows.len(),
            out.display()
        );
    }
    Ok(failed)
}
