//! Labeled feature table shared by the scaler, PCA and the classifiers.

use crate::error::{Error, Result};

/// Row-major table of named feature columns with binary labels
/// (1 = sharp/good, 0 = blurry/bad) and per-row image and subject ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    data: Vec<f64>,
    labels: Vec<u8>,
    ids: Vec<String>,
    subjects: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        ids: Vec<String>,
        subjects: Vec<String>,
        labels: Vec<u8>,
        data: Vec<f64>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let n = ids.len();
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(Error::FeatureMismatch(format!("duplicate column '{name}'")));
            }
        }
        if subjects.len() != n || labels.len() != n || data.len() != n * d {
            return Err(Error::DimensionMismatch(format!(
                "{n} ids, {} subjects, {} labels, {} values for {d} columns",
                subjects.len(),
                labels.len(),
                data.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::FeatureMismatch(format!("label {bad} outside {{0,1}}")));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::FeatureMismatch(format!("non-finite feature value {bad}")));
        }
        if subjects.iter().any(|s| s.is_empty()) {
            return Err(Error::FeatureMismatch("empty subject id".into()));
        }
        Ok(FeatureMatrix { feature_names, data, labels, ids, subjects })
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn subject(&self, i: usize) -> &str {
        &self.subjects[i]
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }

    /// Count of rows with the given label.
    pub fn class_count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// New matrix containing the selected rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let d = self.n_features();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            data,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            subjects: rows.iter().map(|&i| self.subjects[i].clone()).collect(),
        }
    }

    /// New matrix restricted to the named columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<FeatureMatrix> {
        let mut indices = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .feature_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::FeatureMismatch(format!("no column named '{name}'")))?;
            indices.push(idx);
        }
        let d = self.n_features();
        let mut data = Vec::with_capacity(self.n_rows() * indices.len());
        for i in 0..self.n_rows() {
            for &j in &indices {
                data.push(self.data[i * d + j]);
            }
        }
        FeatureMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            self.ids.clone(),
            self.subjects.clone(),
            self.labels.clone(),
            data,
        )
    }

    /// Replaces the numeric payload, keeping names, ids and labels.
    /// Used by the scaler; the buffer must keep the same shape.
    pub fn with_data(&self, data: Vec<f64>) -> FeatureMatrix {
        assert_eq!(data.len(), self.data.len());
        FeatureMatrix { data, ..self.clone() }
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMatrix {
        FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["img0".into(), "img1".into(), "img2".into()],
            vec!["s0".into(), "s0".into(), "s1".into()],
            vec![1, 0, 1],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap()
    }

    #[test]
    fn rows_and_columns_line_up() {
        let m = toy();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_features(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.label(2), 1);
        assert_eq!(m.subject(1), "s0");
    }

    #[test]
    fn duplicate_column_rejected() {
        let r = FeatureMatrix::new(
            vec!["a".into(), "a".into()],
            vec!["i".into()],
            vec!["s".into()],
            vec![0],
            vec![1.0, 2.0],
        );
        assert!(matches!(r, Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn bad_label_rejected() {
        let r = FeatureMatrix::new(
            vec!["a".into()],
            vec!["i".into()],
            vec!["s".into()],
            vec![2],
            vec![1.0],
        );
        assert!(matches!(r, Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn non_finite_value_rejected() {
        let r = FeatureMatrix::new(
            vec!["a".into()],
            vec!["i".into()],
            vec!["s".into()],
            vec![0],
            vec![f64::NAN],
        );
        assert!(matches!(r, Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn take_rows_reorders() {
        let m = toy().take_rows(&[2, 0]);
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.row(0), &[5.0, 6.0]);
        assert_eq!(m.id(1), "img0");
        assert_eq!(m.labels(), &[1, 1]);
    }

    #[test]
    fn select_columns_projects_and_orders() {
        let m = toy().select_columns(&["b"]).unwrap();
        assert_eq!(m.n_features(), 1);
        assert_eq!(m.row(0), &[2.0]);
        assert!(toy().select_columns(&["missing"]).is_err());
    }
}
