//! Principal components analysis via a cyclic Jacobi eigendecomposition
//! of the covariance matrix. Feature counts here are small (a few
//! dozen), where Jacobi is simple, deterministic and accurate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// k × d, rows are unit-length principal directions.
    components: Vec<Vec<f64>>,
    /// Fraction of total variance carried by each component.
    explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }
}

/// Jacobi eigendecomposition of a symmetric matrix (row-major d×d).
/// Returns (eigenvalues, eigenvectors as rows), unsorted.
fn jacobi_eigen(mut a: Vec<f64>, d: usize) -> (Vec<f64>, Vec<f64>) {
    // v starts as identity; columns accumulate the rotations.
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                // tangent of the rotation angle, smaller root for stability
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    // transpose v so eigenvectors come out as rows
    let mut rows = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            rows[i * d + j] = v[j * d + i];
        }
    }
    (eigenvalues, rows)
}

/// Fits the top-`k` principal components of (already scaled) data.
pub fn fit_pca(xs: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (xs.n_rows(), xs.n_features());
    if n < 2 {
        return Err(Error::TooFewRows { need: 2, got: n });
    }
    let max_k = d.min(n - 1);
    if k == 0 || k > max_k {
        return Err(Error::TooManyComponents { requested: k, max: max_k });
    }
    // column means (scaled data is near zero-mean; subtract anyway)
    let mut means = vec![0.0; d];
    for i in 0..n {
        for (j, v) in xs.row(i).iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    // population covariance
    let mut cov = vec![0.0; d * d];
    for i in 0..n {
        let row = xs.row(i);
        for p in 0..d {
            let dp = row[p] - means[p];
            for q in p..d {
                cov[p * d + q] += dp * (row[q] - means[q]);
            }
        }
    }
    for p in 0..d {
        for q in p..d {
            cov[p * d + q] /= n as f64;
            cov[q * d + p] = cov[p * d + q];
        }
    }
    let total: f64 = (0..d).map(|i| cov[i * d + i]).sum();

    let (eigenvalues, vectors) = jacobi_eigen(cov, d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());

    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut comp: Vec<f64> = vectors[idx * d..(idx + 1) * d].to_vec();
        // sign convention: largest-magnitude entry positive, so repeated
        // fits emit identical bytes
        let pivot = comp
            .iter()
            .cloned()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            for c in &mut comp {
                *c = -*c;
            }
        }
        components.push(comp);
        explained.push(if total > 0.0 {
            (eigenvalues[idx] / total).clamp(0.0, 1.0)
        } else {
            0.0
        });
    }
    Ok(PcaModel { components, explained_variance: explained })
}

/// Projects rows onto the model's components: n×k scores.
pub fn project(model: &PcaModel, xs: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    let d = xs.n_features();
    if model.components.iter().any(|c| c.len() != d) {
        return Err(Error::FeatureMismatch(format!(
            "PCA fitted on {} columns, matrix has {d}",
            model.components.first().map_or(0, |c| c.len())
        )));
    }
    let mut out = Vec::with_capacity(xs.n_rows());
    for i in 0..xs.n_rows() {
        let row = xs.row(i);
        out.push(
            model
                .components
                .iter()
                .map(|comp| comp.iter().zip(row).map(|(a, b)| a * b).sum())
                .collect(),
        );
    }
    Ok(out)
}
