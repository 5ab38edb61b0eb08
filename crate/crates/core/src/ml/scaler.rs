//! Column-wise standard scaling, z = (x − mean) / σ with population σ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Scaler {
    pub fn from_parts(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if means.len() != stds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} means vs {} stds",
                means.len(),
                stds.len()
            )));
        }
        if stds.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Degenerate("scaler stds must be positive"));
        }
        Ok(Scaler { means, stds })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.means.len());
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    /// Scales every row of the matrix; names, ids and labels pass through.
    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.n_features() != self.n_features() {
            return Err(Error::FeatureMismatch(format!(
                "scaler fitted on {} columns, matrix has {}",
                self.n_features(),
                x.n_features()
            )));
        }
        let d = x.n_features();
        let mut data = Vec::with_capacity(x.n_rows() * d);
        for i in 0..x.n_rows() {
            data.extend(self.transform_row(x.row(i)));
        }
        Ok(x.with_data(data))
    }
}

/// Fits per-column means and population standard deviations.
pub fn fit_scaler(x: &FeatureMatrix) -> Result<Scaler> {
    let (n, d) = (x.n_rows(), x.n_features());
    if n == 0 {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let mut means = vec![0.0; d];
    for i in 0..n {
        for (j, v) in x.row(i).iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut vars = vec![0.0; d];
    for i in 0..n {
        for (j, v) in x.row(i).iter().enumerate() {
            let dmean = v - means[j];
            vars[j] += dmean * dmean;
        }
    }
    let mut stds = Vec::with_capacity(d);
    for (j, v) in vars.iter().enumerate() {
        let sd = (v / n as f64).sqrt();
        if sd == 0.0 {
            return Err(Error::ConstantColumn(x.feature_names()[j].clone()));
        }
        stds.push(sd);
    }
    Scaler::from_parts(means, stds)
}
