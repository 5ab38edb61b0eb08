//! Confusion counts, F1, ROC curves and AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;
use crate::ml::model::TrainedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Counts at a score threshold; scores >= threshold predict 1.
    pub fn at_threshold(scores: &[f64], labels: &[u8], threshold: f64) -> Confusion {
        let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    /// F1 = 2TP / (2TP + FP + FN); zero when the denominator vanishes
    /// (no actual or predicted positives).
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.tn + self.fn_;
        (self.tp + self.tn) as f64 / total as f64
    }
}

/// ROC points (FPR, TPR) from (0,0) to (1,1), sweeping thresholds from
/// high to low and emitting one point per distinct score, so tied scores
/// move the curve diagonally in a single step.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0;
    while idx < order.len() {
        let s = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == s {
            if labels[order[idx]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a piecewise-linear curve over x in [0, 1].
pub fn auc(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub confusion: Confusion,
    pub f1: f64,
    pub accuracy: f64,
    /// Empty when the test set has a single class.
    pub roc_points: Vec<(f64, f64)>,
    /// None when AUC is undefined (single-class test set).
    pub auc: Option<f64>,
}

impl EvaluationReport {
    /// Builds the report from raw scores; confusion at threshold 0.5.
    pub fn from_scores(scores: &[f64], labels: &[u8]) -> Result<EvaluationReport> {
        if scores.is_empty() || scores.len() != labels.len() {
            return Err(Error::TooFewRows { need: 1, got: scores.len() });
        }
        let confusion = Confusion::at_threshold(scores, labels, 0.5);
        let (roc_points, auc_value) = match roc_curve(scores, labels) {
            Ok(points) => {
                let a = auc(&points);
                (points, Some(a))
            }
            Err(Error::SingleClass) => (Vec::new(), None),
            Err(e) => return Err(e),
        };
        Ok(EvaluationReport {
            f1: confusion.f1(),
            accuracy: confusion.accuracy(),
            confusion,
            roc_points,
            auc: auc_value,
        })
    }

    /// Renders the fixed-width human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str("              predicted 1   predicted 0\n");
        out.push_str(&format!(
            "  actual 1    {:>11}   {:>11}\n",
            self.confusion.tp, self.confusion.fn_
        ));
        out.push_str(&format!(
            "  actual 0    {:>11}   {:>11}\n",
            self.confusion.fp, self.confusion.tn
        ));
        out.push_str(&format!("  F1        {}\n", self.f1));
        out.push_str(&format!("  accuracy  {}\n", self.accuracy));
        match self.auc {
            Some(a) => out.push_str(&format!("  AUC       {a}\n")),
            None => out.push_str("  AUC       undefined (single-class test set)\n"),
        }
        out
    }
}

/// Scores a labelled test set with a trained model and reports the
/// standard quality numbers.
pub fn evaluate(model: &TrainedModel, x_test: &FeatureMatrix) -> Result<EvaluationReport> {
    if x_test.n_rows() == 0 {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let mut scores = Vec::with_capacity(x_test.n_rows());
    for i in 0..x_test.n_rows() {
        scores.push(model.score(x_test.row(i))?);
    }
    EvaluationReport::from_scores(&scores, x_test.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_ranking_scores_one() {
        let scores = [0.9, 0.8, 0.1, 0.2];
        let labels = [1, 1, 0, 0];
        let report = EvaluationReport::from_scores(&scores, &labels).unwrap();
        assert_eq!(report.auc, Some(1.0));
        assert_eq!(report.f1, 1.0);
        assert_eq!(
            report.confusion,
            Confusion { tp: 2, fp: 0, tn: 2, fn_: 0 }
        );
    }

    #[test]
    fn constant_scores_give_half_auc() {
        let scores = [0.5; 6];
        let labels = [1, 0, 1, 0, 1, 0];
        let report = EvaluationReport::from_scores(&scores, &labels).unwrap();
        assert_eq!(report.auc, Some(0.5));
        // a single tie group: the curve jumps straight to (1,1)
        assert_eq!(report.roc_points, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn worked_confusion_f1() {
        let c = Confusion { tp: 4, fp: 1, tn: 4, fn_: 0 };
        assert!((c.f1() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn f1_zero_when_undefined() {
        let c = Confusion { tp: 0, fp: 0, tn: 3, fn_: 0 };
        assert_eq!(c.f1(), 0.0);
    }

    #[test]
    fn single_class_reports_undefined_auc() {
        let report = EvaluationReport::from_scores(&[0.7, 0.2], &[1, 1]).unwrap();
        assert_eq!(report.auc, None);
        assert!(report.roc_points.is_empty());
        assert!((report.f1 - 2.0 / 3.0).abs() < 1e-15, "F1 still computed");
    }

    #[test]
    fn tied_scores_processed_together() {
        // one positive and one negative share a score: diagonal segment
        let scores = [0.9, 0.5, 0.5, 0.1];
        let labels = [1, 1, 0, 0];
        let points = roc_curve(&scores, &labels).unwrap();
        assert_eq!(
            points,
            vec![(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert!((auc(&points) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn auc_matches_rank_statistic_with_ties() {
        // AUC must equal the Mann-Whitney statistic with half credit
        // for ties.
        let scores = [0.3, 0.3, 0.7, 0.2, 0.7, 0.5];
        let labels = [1, 0, 1, 0, 0, 1];
        let points = roc_curve(&scores, &labels).unwrap();
        let mut stat = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            if yi != 1 {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj != 0 {
                    continue;
                }
                pairs += 1.0;
                stat += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        assert!((auc(&points) - stat / pairs).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn roc_properties_hold(seed in any::<u64>(), n in 4usize..40) {
            let mut state = seed | 1;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 40) as f64 / (1u64 << 24) as f64
            };
            // quantised scores so ties actually occur
            let scores: Vec<f64> = (0..n).map(|_| (next() * 8.0).floor() / 8.0).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| (next() > 0.5) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let points = roc_curve(&scores, &labels).unwrap();
            prop_assert_eq!(points[0], (0.0, 0.0));
            prop_assert_eq!(points[points.len() - 1], (1.0, 1.0));
            for w in points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 - 1e-15);
                prop_assert!(w[1].1 >= w[0].1 - 1e-15);
            }
            let a = auc(&points);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
            // negating scores flips the ranking
            let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
            let flipped = auc(&roc_curve(&negated, &labels).unwrap());
            prop_assert!((a - (1.0 - flipped)).abs() < 1e-12);
        }
    }
}
