//! Trained classifier bundles and their on-disk text format.
//!
//! Models are persisted as a flat, versioned, line-oriented text file so a
//! diff is always meaningful and byte-for-byte reproducibility is trivial to
//! audit. Floats round-trip exactly through the shortest decimal form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FEATURE_SCHEMA_VERSION;
use crate::ml::forest::{Forest, Node, Tree};
use crate::ml::logreg::LogReg;
use crate::ml::scaler::Scaler;
use crate::ml::svm::Svm;

const FORMAT_HEADER: &str = "fundus-iq-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogRegCv,
    RandomForest,
    SvmSigmoid,
}

impl ModelKind {
    pub fn all() -> [ModelKind; 3] {
        [ModelKind::LogRegCv, ModelKind::RandomForest, ModelKind::SvmSigmoid]
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LogRegCv => "logreg_cv",
            ModelKind::RandomForest => "random_forest",
            ModelKind::SvmSigmoid => "svm_sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<ModelKind> {
        ModelKind::all().into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    LogRegCv(LogReg),
    RandomForest(Forest),
    SvmSigmoid(Svm),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::LogRegCv(_) => ModelKind::LogRegCv,
            Classifier::RandomForest(_) => ModelKind::RandomForest,
            Classifier::SvmSigmoid(_) => ModelKind::SvmSigmoid,
        }
    }

    fn score_scaled(&self, z: &[f64]) -> f64 {
        match self {
            Classifier::LogRegCv(m) => m.score_row(z),
            Classifier::RandomForest(m) => m.score_row(z),
            Classifier::SvmSigmoid(m) => m.score_row(z),
        }
    }
}

/// A classifier together with the scaler that standardises its inputs and
/// the feature schema it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    schema: String,
    feature_names: Vec<String>,
    scaler: Scaler,
    classifier: Classifier,
}

impl TrainedModel {
    pub fn new(feature_names: Vec<String>, scaler: Scaler, classifier: Classifier) -> Self {
        TrainedModel {
            schema: FEATURE_SCHEMA_VERSION.to_string(),
            feature_names,
            scaler,
            classifier,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.classifier.kind()
    }

    pub fn schema(&self) -> &str {
        &self.schema
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    /// Checks that the given columns match the training schema exactly
    /// (same names, same order, same schema version).
    pub fn check_schema(&self, schema: &str, names: &[String]) -> Result<()> {
        if schema != self.schema {
            return Err(Error::FeatureMismatch(format!(
                "model was trained on feature schema {} but the input uses {}",
                self.schema, schema
            )));
        }
        if names != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch(format!(
                "model feature columns [{}] do not match input columns [{}]",
                self.feature_names.join(", "),
                names.join(", ")
            )));
        }
        Ok(())
    }

    /// Scores one raw (unscaled) feature row; higher means more likely sharp.
    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.scaler.n_features() {
            return Err(Error::FeatureMismatch(format!(
                "expected {} features, got {}",
                self.scaler.n_features(),
                row.len()
            )));
        }
        Ok(self.classifier.score_scaled(&self.scaler.transform_row(row)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "schema {}", self.schema);
        let _ = writeln!(out, "kind {}", self.kind().name());
        let _ = writeln!(out, "features {}", self.feature_names.join(","));
        let _ = writeln!(out, "scaler.means {}", join_floats(self.scaler.means()));
        let _ = writeln!(out, "scaler.stds {}", join_floats(self.scaler.stds()));
        match &self.classifier {
            Classifier::LogRegCv(m) => {
                let _ = writeln!(out, "logreg.lambda {}", m.lambda);
                let _ = writeln!(out, "logreg.intercept {}", m.intercept);
                let _ = writeln!(out, "logreg.weights {}", join_floats(&m.weights));
            }
            Classifier::RandomForest(m) => {
                let _ = writeln!(out, "forest.features {}", m.n_features);
                let _ = writeln!(out, "forest.trees {}", m.trees.len());
                for tree in &m.trees {
                    let mut line = String::from("tree");
                    for node in &tree.nodes {
                        match node {
                            Node::Split { feature, threshold, left, right } => {
                                let _ = write!(line, " s {feature} {threshold} {left} {right}");
                            }
                            Node::Leaf { vote } => {
                                let _ = write!(line, " l {vote}");
                            }
                        }
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
            Classifier::SvmSigmoid(m) => {
                let _ = writeln!(out, "svm.gamma {}", m.gamma);
                let _ = writeln!(out, "svm.coef0 {}", m.coef0);
                let _ = writeln!(out, "svm.bias {}", m.bias);
                let _ = writeln!(out, "svm.support {}", m.support_vectors.len());
                for (sv, coef) in m.support_vectors.iter().zip(&m.dual_coefs) {
                    let _ = writeln!(out, "sv {} {}", coef, join_floats(sv));
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<TrainedModel> {
        let mut lines = Lines::new(text);
        let header = lines.next_line()?;
        if header != FORMAT_HEADER {
            return Err(Error::ModelParse(format!(
                "unrecognised header {header:?}, expected {FORMAT_HEADER:?}"
            )));
        }
        let schema = lines.field("schema")?.to_string();
        let kind_name = lines.field("kind")?;
        let kind = ModelKind::from_name(kind_name)
            .ok_or_else(|| Error::ModelParse(format!("unknown model kind {kind_name:?}")))?;
        let feature_names: Vec<String> =
            lines.field("features")?.split(',').map(str::to_string).collect();
        let means = parse_floats(lines.field("scaler.means")?)?;
        let stds = parse_floats(lines.field("scaler.stds")?)?;
        let scaler = Scaler::from_parts(means, stds)?;
        let classifier = match kind {
            ModelKind::LogRegCv => {
                let lambda = parse_float(lines.field("logreg.lambda")?)?;
                let intercept = parse_float(lines.field("logreg.intercept")?)?;
                let weights = parse_floats(lines.field("logreg.weights")?)?;
                Classifier::LogRegCv(LogReg { weights, intercept, lambda })
            }
            ModelKind::RandomForest => {
                let n_features: usize = lines
                    .field("forest.features")?
                    .parse()
                    .map_err(|_| Error::ModelParse("bad forest.features count".into()))?;
                let n_trees: usize = lines
                    .field("forest.trees")?
                    .parse()
                    .map_err(|_| Error::ModelParse("bad forest.trees count".into()))?;
                let mut trees = Vec::with_capacity(n_trees);
                for _ in 0..n_trees {
                    trees.push(parse_tree(lines.field("tree")?)?);
                }
                Classifier::RandomForest(Forest { trees, n_features })
            }
            ModelKind::SvmSigmoid => {
                let gamma = parse_float(lines.field("svm.gamma")?)?;
                let coef0 = parse_float(lines.field("svm.coef0")?)?;
                let bias = parse_float(lines.field("svm.bias")?)?;
                let n_support: usize = lines
                    .field("svm.support")?
                    .parse()
                    .map_err(|_| Error::ModelParse("bad svm.support count".into()))?;
                let mut support_vectors = Vec::with_capacity(n_support);
                let mut dual_coefs = Vec::with_capacity(n_support);
                for _ in 0..n_support {
                    let body = parse_floats(lines.field("sv")?)?;
                    if body.len() != scaler.n_features() + 1 {
                        return Err(Error::ModelParse(format!(
                            "support vector has {} values, expected {}",
                            body.len(),
                            scaler.n_features() + 1
                        )));
                    }
                    dual_coefs.push(body[0]);
                    support_vectors.push(body[1..].to_vec());
                }
                Classifier::SvmSigmoid(Svm { support_vectors, dual_coefs, bias, gamma, coef0 })
            }
        };
        let end = lines.next_line()?;
        if end != "end" {
            return Err(Error::ModelParse(format!("expected end marker, found {end:?}")));
        }
        if feature_names.len() != scaler.n_features() {
            return Err(Error::ModelParse(format!(
                "{} feature names but scaler of width {}",
                feature_names.len(),
                scaler.n_features()
            )));
        }
        Ok(TrainedModel { schema, feature_names, scaler, classifier })
    }
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines() }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| Error::ModelParse("file ended prematurely".into()))
    }

    /// Next line must start with `key` followed by a space; returns the rest.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ => Err(Error::ModelParse(format!("expected field {key:?}, found line {line:?}"))),
        }
    }
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_float(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::ModelParse(format!("bad float {text:?}")))
}

fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace().map(parse_float).collect()
}

fn parse_tree(body: &str) -> Result<Tree> {
    let mut tokens = body.split_whitespace();
    let mut nodes = Vec::new();
    let bad = |what: &str| Error::ModelParse(format!("bad tree token: {what}"));
    while let Some(tag) = tokens.next() {
        match tag {
            "s" => {
                let feature =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("feature"))?;
                let threshold =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("threshold"))?;
                let left =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("left"))?;
                let right =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("right"))?;
                nodes.push(Node::Split { feature, threshold, left, right });
            }
            "l" => {
                let vote: u8 =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("vote"))?;
                if vote > 1 {
                    return Err(bad("vote"));
                }
                nodes.push(Node::Leaf { vote });
            }
            other => return Err(bad(other)),
        }
    }
    if nodes.is_empty() {
        return Err(Error::ModelParse("empty tree".into()));
    }
    let n = nodes.len();
    for node in &nodes {
        if let Node::Split { left, right, .. } = node {
            if *left >= n || *right >= n {
                return Err(Error::ModelParse("tree child index out of range".into()));
            }
        }
    }
    Ok(Tree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::data::FeatureMatrix;
    use crate::ml::forest::train_random_forest;
    use crate::ml::logreg::train_logreg_cv;
    use crate::ml::svm::train_svm_sigmoid;

    fn dataset() -> FeatureMatrix {
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 24;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = (i % 2) as u8;
            let centre = if y == 1 { 1.5 } else { -1.5 };
            data.push(centre + next());
            data.push(centre * 0.5 + next());
            data.push(next() * 3.0);
            labels.push(y);
        }
        FeatureMatrix::new(
            vec!["alpha".into(), "beta".into(), "gamma".into()],
            (0..n).map(|i| format!("img{i:02}")).collect(),
            (0..n).map(|i| format!("subj{}", i / 2)).collect(),
            labels,
            data,
        )
        .unwrap()
    }

    #[test]
    fn all_kinds_roundtrip_byte_exactly() {
        let x = dataset();
        let models = [
            train_logreg_cv(&x, 5, 3).unwrap(),
            train_random_forest(&x, 12, 3).unwrap(),
            train_svm_sigmoid(&x, 1.0, 3).unwrap(),
        ];
        for model in models {
            let text = model.to_text();
            let back = TrainedModel::from_text(&text).unwrap();
            assert_eq!(back, model);
            assert_eq!(back.to_text(), text);
            // scores agree exactly after the round trip
            for i in 0..x.n_rows() {
                assert_eq!(back.score(x.row(i)).unwrap(), model.score(x.row(i)).unwrap());
            }
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let x = dataset();
        for model in [
            train_logreg_cv(&x, 5, 1).unwrap(),
            train_random_forest(&x, 10, 1).unwrap(),
            train_svm_sigmoid(&x, 1.0, 1).unwrap(),
        ] {
            for i in 0..x.n_rows() {
                let s = model.score(x.row(i)).unwrap();
                assert!((0.0..=1.0).contains(&s), "{:?} score {s}", model.kind());
            }
        }
    }

    #[test]
    fn wrong_width_row_is_refused() {
        let x = dataset();
        let model = train_logreg_cv(&x, 5, 1).unwrap();
        assert!(matches!(model.score(&[1.0, 2.0]), Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn schema_check_rejects_renamed_or_reordered_columns() {
        let x = dataset();
        let model = train_random_forest(&x, 8, 2).unwrap();
        let names = x.feature_names().to_vec();
        assert!(model.check_schema(FEATURE_SCHEMA_VERSION, &names).is_ok());
        let mut reordered = names.clone();
        reordered.swap(0, 1);
        assert!(model.check_schema(FEATURE_SCHEMA_VERSION, &reordered).is_err());
        assert!(model.check_schema("v999", &names).is_err());
    }

    #[test]
    fn corrupt_files_are_rejected_with_parse_errors() {
        let x = dataset();
        let text = train_logreg_cv(&x, 5, 1).unwrap().to_text();
        let cases = [
            text.replace(FORMAT_HEADER, "some-other-format v9"),
            text.replace("kind logreg_cv", "kind perceptron"),
            text.replace("end\n", ""),
            text.replace("logreg.intercept", "logreg.bias"),
        ];
        for (i, case) in cases.iter().enumerate() {
            assert!(
                matches!(TrainedModel::from_text(case), Err(Error::ModelParse(_))),
                "case {i} should fail to parse"
            );
        }
    }

    #[test]
    fn tree_parser_rejects_dangling_children() {
        let x = dataset();
        let text = train_random_forest(&x, 3, 7).unwrap().to_text();
        // truncate every tree to its root split so children point past the end
        let mangled: String = text
            .lines()
            .map(|l| {
                if let Some(rest) = l.strip_prefix("tree ") {
                    let mut tokens: Vec<&str> = rest.split(' ').collect();
                    if tokens[0] == "s" {
                        tokens.truncate(5);
                        format!("tree {}\n", tokens.join(" "))
                    } else {
                        format!("{l}\n")
                    }
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        assert!(TrainedModel::from_text(&mangled).is_err());
    }
}
