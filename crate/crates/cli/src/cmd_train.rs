//! `train`: split extracted features, fit one classifier, evaluate the
//! held-out side, persist the model and a report.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::Config;
use crate::feature_csv::{read_features, FeatureTable};
use fundus_iq::features::feature_names;
use fundus_iq::ml::{
    evaluate, split_with_mode, train_logreg_cv, train_random_forest, train_svm_sigmoid,
    Classifier, EvaluationReport, FeatureMatrix, ModelKind, SplitMode,
};

#[derive(Serialize)]
struct TrainReport<'a> {
    schema: &'a str,
    model_kind: &'a str,
    seed: u64,
    split: &'a str,
    test_fraction: f64,
    n_train: usize,
    n_test: usize,
    /// Ridge strength chosen by cross-validation; logreg_cv only.
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    evaluation: &'a EvaluationReport,
    table: String,
}

/// Builds the training matrix from labeled, successfully extracted rows.
fn labeled_matrix(table: &FeatureTable) -> Result<FeatureMatrix> {
    let (usable, failed) = table.usable_rows();
    if failed > 0 {
        eprintln!("warning: skipping {failed} failed row(s)");
    }
    let labeled: Vec<_> = usable.into_iter().filter(|r| r.label.is_some()).collect();
    if labeled.is_empty() {
        bail!("the feature file has no labeled rows; training needs good/bad labels");
    }
    let mut data = Vec::with_capacity(labeled.len() * table.names.len());
    for row in &labeled {
        data.extend_from_slice(row.outcome.as_ref().expect("usable rows extracted fine"));
    }
    Ok(FeatureMatrix::new(
        table.names.clone(),
        labeled.iter().map(|r| r.id.clone()).collect(),
        labeled.iter().map(|r| r.subject.clone()).collect(),
        labeled.iter().map(|r| r.label.unwrap()).collect(),
        data,
    )?)
}

pub fn run(
    features_path: &Path,
    kind_name: &str,
    out: &Path,
    report_path: Option<&Path>,
    cfg: &Config,
) -> Result<()> {
    let table = read_features(features_path)?;
    let expected = feature_names(&cfg.wavelet_families);
    if table.names != expected {
        bail!(
            "{}: feature columns do not match the configured extractor schema; \
             re-run extract with the same config",
            features_path.display()
        );
    }
    let kind = ModelKind::from_name(kind_name)
        .with_context(|| format!("unknown model kind '{kind_name}'"))?;

    let x = labeled_matrix(&table)?;
    if !x.has_both_classes() {
        bail!("training data contains a single class; need both good and bad rows");
    }
    let (train, test) = split_with_mode(&x, cfg.split, cfg.test_fraction, cfg.seed)?;

    let model = match kind {
        ModelKind::LogRegCv => train_logreg_cv(&train, cfg.cv_folds, cfg.seed)?,
        ModelKind::RandomForest => train_random_forest(&train, cfg.trees, cfg.seed)?,
        ModelKind::SvmSigmoid => train_svm_sigmoid(&train, cfg.svm_c, cfg.seed)?,
    };
    let evaluation = evaluate(&model, &test)?;

    std::fs::write(out, model.to_text())
        .with_context(|| format!("cannot write model {}", out.display()))?;

    let lambda = match model.classifier() {
        Classifier::LogRegCv(m) => Some(m.lambda),
        _ => None,
    };
    let report = TrainReport {
        schema: model.schema(),
        model_kind: kind.name(),
        seed: cfg.seed,
        split: match cfg.split {
            SplitMode::Subject => "subject",
            SplitMode::Image => "image",
        },
        test_fraction: cfg.test_fraction,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        lambda,
        evaluation: &evaluation,
        table: evaluation.to_table(),
    };
    let default_report = out.with_extension("report.json");
    let report_path = report_path.unwrap_or(&default_report);
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(report_path, json + "\n")
        .with_context(|| format!("cannot write report {}", report_path.display()))?;

    println!(
        "trained {} on {} rows, evaluated on {}:",
        kind.name(),
        train.n_rows(),
        test.n_rows()
    );
    print!("{}", evaluation.to_table());
    println!("model:  {}", out.display());
    println!("report: {}", report_path.display());
    Ok(())
}
