//! L2-regularised logistic regression fitted by gradient descent with
//! backtracking line search, and the 5-fold cross-validated wrapper that
//! picks the regularisation strength by mean F1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;
use crate::ml::eval::Confusion;
use crate::ml::model::{Classifier, TrainedModel};
use crate::ml::scaler::fit_scaler;
use crate::ml::sigmoid;

/// The λ grid searched by cross-validation.
pub const LAMBDA_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

const GRAD_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReg {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Regularisation strength the CV selected.
    pub lambda: f64,
}

impl LogReg {
    pub fn decision(&self, z: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn score_row(&self, z: &[f64]) -> f64 {
        sigmoid(self.decision(z))
    }
}

/// Penalised negative log-likelihood; the intercept is not regularised.
/// Public so the gradient can be validated against finite differences
/// from outside the crate.
pub fn objective(x: &FeatureMatrix, w: &[f64], b: f64, lambda: f64) -> f64 {
    let mut loss = 0.0;
    for i in 0..x.n_rows() {
        let m = b + w.iter().zip(x.row(i)).map(|(w, v)| w * v).sum::<f64>();
        // ln(1 + e^m) − y·m, computed stably
        loss += m.max(0.0) + (-m.abs()).exp().ln_1p() - x.label(i) as f64 * m;
    }
    loss + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of `objective` in (weights, intercept) order.
pub fn gradient(x: &FeatureMatrix, w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let d = x.n_features();
    let mut gw = vec![0.0; d];
    let mut gb = 0.0;
    for i in 0..x.n_rows() {
        let m = b + w.iter().zip(x.row(i)).map(|(w, v)| w * v).sum::<f64>();
        let resid = sigmoid(m) - x.label(i) as f64;
        for (g, v) in gw.iter_mut().zip(x.row(i)) {
            *g += resid * v;
        }
        gb += resid;
    }
    for (g, w) in gw.iter_mut().zip(w) {
        *g += lambda * w;
    }
    (gw, gb)
}

/// Fits one model at a fixed λ on (already scaled) data.
fn fit(x: &FeatureMatrix, lambda: f64) -> LogReg {
    let d = x.n_features();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut j = objective(x, &w, b, lambda);
    for _ in 0..MAX_ITERS {
        let (gw, gb) = gradient(x, &w, b, lambda);
        let gnorm_sq: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if gnorm_sq.sqrt() < GRAD_TOL {
            break;
        }
        // backtracking line search on the Armijo condition
        let mut t = 1.0;
        loop {
            let wt: Vec<f64> = w.iter().zip(&gw).map(|(w, g)| w - t * g).collect();
            let bt = b - t * gb;
            let jt = objective(x, &wt, bt, lambda);
            if jt <= j - 0.5 * t * gnorm_sq || t < 1e-14 {
                w = wt;
                b = bt;
                j = jt;
                break;
            }
            t *= 0.5;
        }
    }
    LogReg { weights: w, intercept: b, lambda }
}

/// Assigns each row to one of `folds` folds, class-stratified and
/// seed-deterministic.
pub(crate) fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    for class in [0u8, 1] {
        let count = labels.iter().filter(|&&y| y == class).count();
        if count < folds {
            return Err(Error::TooFewRows { need: folds, got: count });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in [0u8, 1] {
        let mut indices: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        indices.shuffle(&mut rng);
        for (pos, &i) in indices.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Grid search over λ by mean F1 across stratified folds; ties go to the
/// stronger regulariser. Returns (λ, mean F1).
pub(crate) fn cv_select(xs: &FeatureMatrix, folds: usize, seed: u64) -> Result<(f64, f64)> {
    let assignment = stratified_folds(xs.labels(), folds, seed)?;
    let mut best = (LAMBDA_GRID[0], f64::NEG_INFINITY);
    for &lambda in &LAMBDA_GRID {
        let mut f1_sum = 0.0;
        for fold in 0..folds {
            let train_rows: Vec<usize> =
                (0..xs.n_rows()).filter(|&i| assignment[i] != fold).collect();
            let val_rows: Vec<usize> =
                (0..xs.n_rows()).filter(|&i| assignment[i] == fold).collect();
            let model = fit(&xs.take_rows(&train_rows), lambda);
            let val = xs.take_rows(&val_rows);
            let scores: Vec<f64> = (0..val.n_rows()).map(|i| model.score_row(val.row(i))).collect();
            f1_sum += Confusion::at_threshold(&scores, val.labels(), 0.5).f1();
        }
        let mean_f1 = f1_sum / folds as f64;
        if mean_f1 >= best.1 {
            best = (lambda, mean_f1);
        }
    }
    Ok(best)
}

/// Cross-validated logistic regression on raw features; the returned
/// model carries its own scaler.
pub fn train_logreg_cv(x: &FeatureMatrix, folds: usize, seed: u64) -> Result<TrainedModel> {
    if !x.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let scaler = fit_scaler(x)?;
    let xs = scaler.transform(x)?;
    let (lambda, _) = cv_select(&xs, folds, seed)?;
    let model = fit(&xs, lambda);
    Ok(TrainedModel::new(
        x.feature_names().to_vec(),
        scaler,
        Classifier::LogRegCv(model),
    ))
}
