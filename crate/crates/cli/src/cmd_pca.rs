//! `pca`: project one feature cluster onto its first two principal
//! components for plotting.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::config::Config;
use crate::feature_csv::read_features;
use crate::manifest::label_text;
use fundus_iq::features::{feature_names, Cluster};
use fundus_iq::ml::{fit_pca, fit_scaler, project, FeatureMatrix};

pub fn run(features_path: &Path, cluster_name: &str, out: &Path, cfg: &Config) -> Result<()> {
    let table = read_features(features_path)?;
    let expected = feature_names(&cfg.wavelet_families);
    if table.names != expected {
        bail!(
            "{}: feature columns do not match the configured extractor schema; \
             re-run extract with the same config",
            features_path.display()
        );
    }

    let cluster = Cluster::from_name(cluster_name)?;
    let indices = cluster.member_indices(&table.names);
    if indices.len() < 2 {
        bail!(
            "cluster '{}' selects {} feature column(s); PCA needs at least 2",
            cluster.name(),
            indices.len()
        );
    }

    let (usable, failed) = table.usable_rows();
    if failed > 0 {
        eprintln!("warning: skipping {failed} failed row(s) from {}", features_path.display());
    }
    if usable.len() < 2 {
        bail!("need at least 2 usable rows, got {}", usable.len());
    }

    let selected_names: Vec<String> = indices.iter().map(|&j| table.names[j].clone()).collect();
    let mut data = Vec::with_capacity(usable.len() * indices.len());
    for row in &usable {
        let values = row.outcome.as_ref().expect("usable rows extracted fine");
        data.extend(indices.iter().map(|&j| values[j]));
    }
    // labels are irrelevant to PCA; zero for unlabeled rows, the output
    // writes the real label text from the table
    let x = FeatureMatrix::new(
        selected_names,
        usable.iter().map(|r| r.id.clone()).collect(),
        usable.iter().map(|r| r.subject.clone()).collect(),
        usable.iter().map(|r| r.label.unwrap_or(0)).collect(),
        data,
    )?;
    let scaler = fit_scaler(&x)?;
    let scaled = scaler.transform(&x)?;
    let pca = fit_pca(&scaled, 2)?;
    let scores = project(&pca, &scaled)?;

    let mut buf = Vec::new();
    writeln!(buf, "# fundus-iq pca cluster={} columns={}", cluster.name(), indices.len())?;
    writeln!(
        buf,
        "# explained_variance pc1={} pc2={}",
        pca.explained_variance()[0],
        pca.explained_variance()[1]
    )?;
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        writer.write_record(["id", "subject", "label", "pc1", "pc2"])?;
        for (row, score) in usable.iter().zip(&scores) {
            writer.write_record([
                row.id.as_str(),
                row.subject.as_str(),
                label_text(row.label),
                &format!("{}", score[0]),
                &format!("{}", score[1]),
            ])?;
        }
        writer.flush()?;
    }
    std::fs::write(out, buf).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(())
}
