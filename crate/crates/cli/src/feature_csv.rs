//! The feature CSV exchanged between `extract`, `pca` and `train`.
//!
//! Layout: one schema comment line, a header row, then one record per
//! image. The first four columns are fixed metadata; the rest are feature
//! columns in extraction order.
//!
//! ```text
//! # fundus-iq features fv1
//! id,subject,label,error,stat.mean_pixel_energy,...
//! images/a.png,s01,good,,0.04211968312,...
//! images/b.png,s01,bad,cannot read image images/b.png: ...,,,...
//! ```
//!
//! A failed image keeps its row: the `error` column holds the message and
//! every feature cell is empty. Floats are written with Rust's shortest
//! round-trip formatting, so a read-back is bit-exact and repeated runs
//! are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::manifest::{label_text, parse_label};
use fundus_iq::features::FEATURE_SCHEMA_VERSION;

pub const META_COLUMNS: [&str; 4] = ["id", "subject", "label", "error"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub subject: String,
    pub label: Option<u8>,
    /// Extracted values, or the per-image failure message.
    pub outcome: Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

pub fn write_features(path: &Path, names: &[String], rows: &[FeatureRow]) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# fundus-iq features {FEATURE_SCHEMA_VERSION}")?;
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        let mut header: Vec<&str> = META_COLUMNS.to_vec();
        header.extend(names.iter().map(String::as_str));
        writer.write_record(&header)?;
        for row in rows {
            let mut record = vec![
                row.id.clone(),
                row.subject.clone(),
                label_text(row.label).to_string(),
            ];
            match &row.outcome {
                Ok(values) => {
                    if values.len() != names.len() {
                        bail!(
                            "row '{}' has {} values for {} columns",
                            row.id,
                            values.len(),
                            names.len()
                        );
                    }
                    record.push(String::new());
                    record.extend(values.iter().map(|v| format!("{v}")));
                }
                Err(message) => {
                    record.push(message.clone());
                    record.extend(std::iter::repeat(String::new()).take(names.len()));
                }
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
    }
    fs::write(path, buf).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read feature file {}", path.display()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let schema = first
        .strip_prefix("# fundus-iq features ")
        .with_context(|| format!("{}: missing schema line", path.display()))?
        .trim();
    if schema != FEATURE_SCHEMA_VERSION {
        bail!(
            "{}: feature schema '{schema}' does not match this build's '{FEATURE_SCHEMA_VERSION}'",
            path.display()
        );
    }

    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.len() < META_COLUMNS.len() || headers[..META_COLUMNS.len()] != META_COLUMNS {
        bail!(
            "{}: header must start with '{}'",
            path.display(),
            META_COLUMNS.join(",")
        );
    }
    let names: Vec<String> = headers[META_COLUMNS.len()..].to_vec();

    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = index + 3; // schema line + header line precede the data
        if record.len() != headers.len() {
            bail!(
                "{}: row {row_no} has {} fields, expected {}",
                path.display(),
                record.len(),
                headers.len()
            );
        }
        let error = record[3].to_string();
        let outcome = if error.is_empty() {
            let mut values = Vec::with_capacity(names.len());
            for (j, cell) in record.iter().skip(META_COLUMNS.len()).enumerate() {
                let value: f64 = cell.parse().with_context(|| {
                    format!(
                        "{}: row {row_no}, column '{}': bad number '{cell}'",
                        path.display(),
                        names[j]
                    )
                })?;
                values.push(value);
            }
            Ok(values)
        } else {
            Err(error)
        };
        rows.push(FeatureRow {
            id: record[0].to_string(),
            subject: record[1].to_string(),
            label: parse_label(&record[2])
                .with_context(|| format!("{}: row {row_no}", path.display()))?,
            outcome,
        });
    }
    Ok(FeatureTable { names, rows })
}

impl FeatureTable {
    /// Rows that extracted successfully; failed rows are reported through
    /// the returned count so callers can warn.
    pub fn usable_rows(&self) -> (Vec<&FeatureRow>, usize) {
        let usable: Vec<&FeatureRow> = self.rows.iter().filter(|r| r.outcome.is_ok()).collect();
        let failed = self.rows.len() - usable.len();
        (usable, failed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> (Vec<String>, Vec<FeatureRow>) {
        let names = vec!["f.a".to_string(), "f.b".to_string()];
        let rows = vec![
            FeatureRow {
                id: "img/one.png".into(),
                subject: "s1".into(),
                label: Some(1),
                outcome: Ok(vec![0.1, 2.0f64.sqrt()]),
            },
            FeatureRow {
                id: "img/two.png".into(),
                subject: "s1".into(),
                label: Some(0),
                outcome: Err("cannot read image img/two.png: boom".into()),
            },
            FeatureRow {
                id: "img, with comma.png".into(),
                subject: "s2".into(),
                label: None,
                outcome: Ok(vec![-3.5e-12, 1e18]),
            },
        ];
        (names, rows)
    }

    #[test]
    fn roundtrip_is_exact() {
        let (names, rows) = sample_rows();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features(&path, &names, &rows).unwrap();
        let table = read_features(&path).unwrap();
        assert_eq!(table.names, names);
        assert_eq!(table.rows, rows);
    }

    #[test]
    fn writing_twice_is_byte_identical() {
        let (names, rows) = sample_rows();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_features(&a, &names, &rows).unwrap();
        write_features(&b, &names, &rows).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn schema_line_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        fs::write(&path, "# fundus-iq features fv999\nid,subject,label,error,f.a\n").unwrap();
        let err = read_features(&path).unwrap_err();
        assert!(err.to_string().contains("fv999"), "{err}");

        fs::write(&path, "id,subject,label,error,f.a\n").unwrap();
        assert!(read_features(&path).is_err(), "missing schema line");
    }

    #[test]
    fn reordered_meta_columns_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        fs::write(
            &path,
            format!("# fundus-iq features {FEATURE_SCHEMA_VERSION}\nsubject,id,label,error,f.a\nx,s,good,,1.0\n"),
        )
        .unwrap();
        assert!(read_features(&path).is_err());
    }

    #[test]
    fn usable_rows_drops_failures() {
        let (names, rows) = sample_rows();
        let table = FeatureTable { names, rows };
        let (usable, failed) = table.usable_rows();
        assert_eq!(usable.len(), 2);
        assert_eq!(failed, 1);
    }
}
