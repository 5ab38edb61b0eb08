//! Image manifest: a CSV with columns `path,subject,label` where label is
//! `good`, `bad` or empty for unlabeled images.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub subject: String,
    pub label: Option<u8>,
}

pub fn parse_label(text: &str) -> Result<Option<u8>> {
    match text {
        "good" => Ok(Some(1)),
        "bad" => Ok(Some(0)),
        "" | "unlabeled" => Ok(None),
        other => bail!("label must be 'good', 'bad' or empty, got '{other}'"),
    }
}

pub fn label_text(label: Option<u8>) -> &'static str {
    match label {
        Some(1) => "good",
        Some(_) => "bad",
        None => "",
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers != ["path", "subject", "label"] {
        bail!(
            "manifest header must be 'path,subject,label', got '{}'",
            headers.join(",")
        );
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let row = index + 2; // after the header line
        if record.len() != 3 {
            bail!("manifest row {row}: expected 3 fields, got {}", record.len());
        }
        let entry = ManifestEntry {
            path: record[0].to_string(),
            subject: record[1].to_string(),
            label: parse_label(&record[2]).with_context(|| format!("manifest row {row}"))?,
        };
        if entry.path.is_empty() {
            bail!("manifest row {row}: empty image path");
        }
        if entry.subject.is_empty() {
            bail!("manifest row {row}: empty subject id");
        }
        if !seen.insert(entry.path.clone()) {
            bail!("manifest row {row}: duplicate path '{}'", entry.path);
        }
        entries.push(entry);
    }
    Ok(entries)
}
