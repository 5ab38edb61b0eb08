//! Sigmoid-kernel support vector classifier solved by the simplified SMO
//! algorithm with a seeded partner choice. Scores are the logistic
//! squashing of the decision margin.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;
use crate::ml::model::{Classifier, TrainedModel};
use crate::ml::scaler::fit_scaler;
use crate::ml::sigmoid;

pub const DEFAULT_PENALTY: f64 = 1.0;

const KKT_TOL: f64 = 1e-3;
const ALPHA_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    /// Support vectors, one row per retained training point.
    pub(crate) support_vectors: Vec<Vec<f64>>,
    /// y_i · α_i for each support vector.
    pub(crate) dual_coefs: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) gamma: f64,
    pub(crate) coef0: f64,
}

impl Svm {
    pub fn decision(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * kernel(self.gamma, self.coef0, sv, z))
            .sum::<f64>()
            + self.bias
    }

    pub fn score_row(&self, z: &[f64]) -> f64 {
        sigmoid(self.decision(z))
    }
}

/// tanh(γ·⟨u,v⟩ + r).
pub fn sigmoid_kernel(gamma: f64, coef0: f64, u: &[f64], v: &[f64]) -> f64 {
    (gamma * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + coef0).tanh()
}

fn kernel(gamma: f64, coef0: f64, u: &[f64], v: &[f64]) -> f64 {
    sigmoid_kernel(gamma, coef0, u, v)
}

pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
}

/// Simplified SMO: sweep the KKT conditions, pairing each violator with a
/// seeded random partner, until a full sweep changes nothing. Public as a
/// low-level hook so the solver can be checked against external QP solvers.
pub fn fit_smo(
    x: &FeatureMatrix,
    c: f64,
    gamma: f64,
    coef0: f64,
    seed: u64,
) -> Result<SmoSolution> {
    let n = x.n_rows();
    let y: Vec<f64> = x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| kernel(gamma, coef0, x.row(i), x.row(j))).collect())
        .collect();
    let mut alphas = vec![0.0; n];
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_passes = 10 * n * 1000;
    let decision = |alphas: &[f64], b: f64, i: usize| -> f64 {
        (0..n).map(|j| alphas[j] * y[j] * k[j][i]).sum::<f64>() + b
    };
    for pass in 1..=max_passes {
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alphas, b, i) - y[i];
            let r = e_i * y[i];
            if !((r < -KKT_TOL && alphas[i] < c) || (r > KKT_TOL && alphas[i] > 0.0)) {
                continue;
            }
            let j = loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            };
            let e_j = decision(&alphas, b, j) - y[j];
            let (a_i_old, a_j_old) = (alphas[i], alphas[j]);
            let (lo, hi) = if y[i] != y[j] {
                ((a_j_old - a_i_old).max(0.0), (c + a_j_old - a_i_old).min(c))
            } else {
                ((a_i_old + a_j_old - c).max(0.0), (a_i_old + a_j_old).min(c))
            };
            if lo >= hi {
                continue;
            }
            let eta = 2.0 * k[i][j] - k[i][i] - k[j][j];
            if eta >= 0.0 {
                continue;
            }
            let a_j = (a_j_old - y[j] * (e_i - e_j) / eta).clamp(lo, hi);
            if (a_j - a_j_old).abs() < ALPHA_EPS {
                continue;
            }
            // exact arithmetic keeps a_i inside the box; rounding may not
            let a_i = (a_i_old + y[i] * y[j] * (a_j_old - a_j)).clamp(0.0, c);
            alphas[i] = a_i;
            alphas[j] = a_j;
            let b1 = b - e_i - y[i] * (a_i - a_i_old) * k[i][i] - y[j] * (a_j - a_j_old) * k[i][j];
            let b2 = b - e_j - y[i] * (a_i - a_i_old) * k[i][j] - y[j] * (a_j - a_j_old) * k[j][j];
            b = if alphas[i] > 0.0 && alphas[i] < c {
                b1
            } else if alphas[j] > 0.0 && alphas[j] < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            changed += 1;
        }
        if changed == 0 {
            return Ok(SmoSolution { alphas, bias: b });
        }
        if pass == max_passes {
            break;
        }
    }
    Err(Error::SmoNonConvergence(max_passes))
}

/// Σα − ½·ΣΣ αᵢαⱼyᵢyⱼK(i,j), the quantity SMO maximises.
pub fn dual_objective(
    x: &FeatureMatrix,
    alphas: &[f64],
    gamma: f64,
    coef0: f64,
) -> f64 {
    let n = x.n_rows();
    let y: Vec<f64> = x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel(gamma, coef0, x.row(i), x.row(j));
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Population variance of every entry of the matrix, for the γ heuristic.
fn entry_variance(x: &FeatureMatrix) -> f64 {
    let vals = x.values();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Sigmoid-kernel SVM on raw features; the returned model carries its own
/// scaler, and γ = 1 / (n_features · variance of the scaled matrix).
pub fn train_svm_sigmoid(x: &FeatureMatrix, c: f64, seed: u64) -> Result<TrainedModel> {
    if !x.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let scaler = fit_scaler(x)?;
    let xs = scaler.transform(x)?;
    let gamma = 1.0 / (xs.n_features() as f64 * entry_variance(&xs));
    let coef0 = 0.0;
    let solution = fit_smo(&xs, c, gamma, coef0, seed)?;
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..xs.n_rows() {
        if solution.alphas[i] > 0.0 {
            support_vectors.push(xs.row(i).to_vec());
            let y = if xs.label(i) == 1 { 1.0 } else { -1.0 };
            dual_coefs.push(solution.alphas[i] * y);
        }
    }
    let svm = Svm { support_vectors, dual_coefs, bias: solution.bias, gamma, coef0 };
    Ok(TrainedModel::new(x.feature_names().to_vec(), scaler, Classifier::SvmSigmoid(svm)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(labels: Vec<u8>, data: Vec<f64>, d: usize) -> FeatureMatrix {
        let n = labels.len();
        FeatureMatrix::new(
            (0..d).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| format!("img{i}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
            labels,
            data,
        )
        .unwrap()
    }

    fn blobs(n_per_class: usize, gap: f64, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * n_per_class;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = (i % 2) as u8;
            let centre = if y == 1 { gap } else { -gap };
            data.push(centre + rng.gen::<f64>() - 0.5);
            data.push(centre + rng.gen::<f64>() - 0.5);
            labels.push(y);
        }
        matrix(labels, data, 2)
    }

    /// Maximises the dual by enumerating every face of the box: each α is
    /// pinned at 0, pinned at C, or free; the free block plus the equality
    /// multiplier is solved as a dense linear system.
    fn qp_oracle(x: &FeatureMatrix, c: f64, gamma: f64, coef0: f64) -> f64 {
        let n = x.n_rows();
        let y: Vec<f64> =
            x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                q[i][j] = y[i] * y[j] * kernel(gamma, coef0, x.row(i), x.row(j));
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut face = vec![0u8; n]; // 0 = pinned low, 1 = pinned high, 2 = free
        'faces: loop {
            let free: Vec<usize> = (0..n).filter(|&i| face[i] == 2).collect();
            let mut alphas: Vec<f64> =
                face.iter().map(|&f| if f == 1 { c } else { 0.0 }).collect();
            let feasible = if free.is_empty() {
                (0..n).map(|i| y[i] * alphas[i]).sum::<f64>().abs() < 1e-9
            } else {
                solve_face(&q, &y, c, &free, &mut alphas)
            };
            if feasible {
                let mut w = alphas.iter().sum::<f64>();
                for i in 0..n {
                    for j in 0..n {
                        w -= 0.5 * alphas[i] * alphas[j] * q[i][j];
                    }
                }
                best = best.max(w);
            }
            // advance the mixed-radix counter over faces
            for i in 0..n {
                face[i] += 1;
                if face[i] < 3 {
                    continue 'faces;
                }
                face[i] = 0;
            }
            break;
        }
        best
    }

    /// Stationarity on the free block under Σyα=0; writes the free α values
    /// and reports whether they land inside the box.
    fn solve_face(
        q: &[Vec<f64>],
        y: &[f64],
        c: f64,
        free: &[usize],
        alphas: &mut [f64],
    ) -> bool {
        let m = free.len();
        let mut a = vec![vec![0.0; m + 2]; m + 1];
        for (r, &f) in free.iter().enumerate() {
            for (cdx, &g) in free.iter().enumerate() {
                a[r][cdx] = q[f][g];
            }
            a[r][m] = y[f];
            let fixed: f64 =
                (0..y.len()).filter(|i| !free.contains(i)).map(|j| q[f][j] * alphas[j]).sum();
            a[r][m + 1] = 1.0 - fixed;
        }
        for (cdx, &g) in free.iter().enumerate() {
            a[m][cdx] = y[g];
        }
        a[m][m + 1] = -(0..y.len()).filter(|i| !free.contains(i)).map(|j| y[j] * alphas[j]).sum::<f64>();
        // gaussian elimination with partial pivoting
        let size = m + 1;
        for col in 0..size {
            let pivot = (col..size).max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()));
            let pivot = pivot.unwrap();
            if a[pivot][col].abs() < 1e-12 {
                return false;
            }
            a.swap(col, pivot);
            for r in 0..size {
                if r == col {
                    continue;
                }
                let factor = a[r][col] / a[col][col];
                for k in col..size + 1 {
                    a[r][k] -= factor * a[col][k];
                }
            }
        }
        for (r, &f) in free.iter().enumerate() {
            let v = a[r][m + 1] / a[r][r];
            if !(-1e-9..=c + 1e-9).contains(&v) {
                return false;
            }
            alphas[f] = v.clamp(0.0, c);
        }
        true
    }

    #[test]
    fn separable_blobs_reach_perfect_training_accuracy() {
        let x = blobs(10, 3.0, 4);
        let model = train_svm_sigmoid(&x, DEFAULT_PENALTY, 6).unwrap();
        for i in 0..x.n_rows() {
            let s = model.score(x.row(i)).unwrap();
            assert_eq!((s >= 0.5) as u8, x.label(i), "row {i} score {s}");
        }
    }

    #[test]
    fn dual_objective_matches_exhaustive_qp_on_toy_problem() {
        let x = matrix(
            vec![1, 1, 1, 1, 0, 0, 0, 0],
            vec![
                1.8, 1.2, 2.3, 1.9, 1.1, 2.6, 2.2, 0.9, //
                -1.6, -1.1, -2.4, -1.3, -0.8, -2.1, -1.9, -1.5,
            ],
            2,
        );
        let (gamma, coef0, c) = (0.1, 0.0, 1.0);
        let solution = fit_smo(&x, c, gamma, coef0, 11).unwrap();
        let smo_obj = dual_objective(&x, &solution.alphas, gamma, coef0);
        let oracle_obj = qp_oracle(&x, c, gamma, coef0);
        assert!(
            (smo_obj - oracle_obj).abs() < 1e-2,
            "smo {smo_obj} vs oracle {oracle_obj}"
        );
        // the iterate must actually be feasible
        let y: Vec<f64> = x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let balance: f64 = solution.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-9, "Σyα = {balance}");
        assert!(solution.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
    }

    #[test]
    fn same_seed_reproduces_the_model() {
        let x = blobs(12, 1.2, 31);
        let a = train_svm_sigmoid(&x, 1.0, 3).unwrap();
        let b = train_svm_sigmoid(&x, 1.0, 3).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn scores_squash_the_margin() {
        let x = blobs(8, 2.0, 13);
        let model = train_svm_sigmoid(&x, 1.0, 1).unwrap();
        for i in 0..x.n_rows() {
            let s = model.score(x.row(i)).unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn gamma_follows_the_scaled_variance_heuristic() {
        let x = blobs(10, 1.5, 2);
        let scaler = fit_scaler(&x).unwrap();
        let xs = scaler.transform(&x).unwrap();
        // population-scaled columns have unit variance, so γ = 1/d exactly
        assert!((entry_variance(&xs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let x = matrix(vec![0; 6], (0..12).map(f64::from).collect(), 2);
        assert!(matches!(train_svm_sigmoid(&x, 1.0, 0), Err(Error::SingleClass)));
    }
}
