//! The classical ML layer: feature containers, scaling, PCA, three
//! classifiers, dataset splitting, and evaluation.

pub mod data;
pub mod eval;
pub mod forest;
pub mod logreg;
pub mod model;
pub mod pca;
pub mod scaler;
pub mod split;
pub mod svm;

pub use data::FeatureMatrix;
pub use eval::{evaluate, Confusion, EvaluationReport};
pub use forest::{train_random_forest, Forest, DEFAULT_TREES};
pub use logreg::{train_logreg_cv, LogReg, LAMBDA_GRID};
pub use model::{Classifier, ModelKind, TrainedModel};
pub use pca::{fit_pca, project, PcaModel};
pub use scaler::{fit_scaler, Scaler};
pub use split::{split_dataset, split_dataset_by_subject, split_with_mode, SplitMode};
pub use svm::{train_svm_sigmoid, Svm, DEFAULT_PENALTY};

/// 1 / (1 + e^{-t}), numerically stable on both tails.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::sigmoid;

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) > 1.0 - 1e-15);
        assert!(sigmoid(-40.0) < 1e-15);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
