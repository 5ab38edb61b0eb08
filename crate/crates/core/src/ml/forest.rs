//! Random forest classifier: seeded bagging over CART trees grown with the
//! Gini criterion, scoring by the fraction of trees voting for class 1.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;
use crate::ml::model::{Classifier, TrainedModel};
use crate::ml::scaler::fit_scaler;

pub const DEFAULT_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { vote: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn vote(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { vote } => return vote,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
    pub(crate) n_features: usize,
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Fraction of trees voting for class 1.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let ones = self.trees.iter().filter(|t| t.vote(row) == 1).count();
        ones as f64 / self.trees.len() as f64
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Best (threshold, weighted impurity) for one feature over the given rows,
/// or None when the feature is constant on them. Thresholds sit midway
/// between consecutive distinct values.
fn best_split_on(
    x: &FeatureMatrix,
    rows: &[usize],
    feature: usize,
) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, u8)> =
        rows.iter().map(|&i| (x.row(i)[feature], x.label(i))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total_pos = pairs.iter().filter(|p| p.1 == 1).count();
    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0usize;
    for i in 0..n - 1 {
        if pairs[i].1 == 1 {
            left_pos += 1;
        }
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let left_n = i + 1;
        let right_n = n - left_n;
        let impurity = (left_n as f64 * gini(left_pos, left_n)
            + right_n as f64 * gini(total_pos - left_pos, right_n))
            / n as f64;
        if best.map_or(true, |(_, b)| impurity < b) {
            best = Some(((pairs[i].0 + pairs[i + 1].0) / 2.0, impurity));
        }
    }
    best
}

fn majority(x: &FeatureMatrix, rows: &[usize]) -> u8 {
    let pos = rows.iter().filter(|&&i| x.label(i) == 1).count();
    (2 * pos > rows.len()) as u8
}

fn grow(
    x: &FeatureMatrix,
    rows: &[usize],
    mtry: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let pos = rows.iter().filter(|&&i| x.label(i) == 1).count();
    let node_gini = gini(pos, rows.len());
    if node_gini == 0.0 {
        nodes.push(Node::Leaf { vote: (pos > 0) as u8 });
        return nodes.len() - 1;
    }
    // draw mtry candidate features without replacement
    let d = x.n_features();
    let mut candidates: Vec<usize> = (0..d).collect();
    for i in 0..mtry.min(d) {
        let j = rng.gen_range(i..d);
        candidates.swap(i, j);
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for &feature in &candidates[..mtry.min(d)] {
        if let Some((threshold, impurity)) = best_split_on(x, rows, feature) {
            if best.map_or(true, |(_, _, b)| impurity < b) {
                best = Some((feature, threshold, impurity));
            }
        }
    }
    let Some((feature, threshold, impurity)) = best else {
        // every candidate feature constant on this node
        nodes.push(Node::Leaf { vote: majority(x, rows) });
        return nodes.len() - 1;
    };
    if impurity >= node_gini {
        nodes.push(Node::Leaf { vote: majority(x, rows) });
        return nodes.len() - 1;
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&i| x.row(i)[feature] <= threshold);
    let at = nodes.len();
    nodes.push(Node::Leaf { vote: 0 }); // placeholder until children exist
    let left = grow(x, &left_rows, mtry, rng, nodes);
    let right = grow(x, &right_rows, mtry, rng, nodes);
    nodes[at] = Node::Split { feature, threshold, left, right };
    at
}

/// Fits a forest on (already scaled) data.
pub fn fit_forest(x: &FeatureMatrix, n_trees: usize, seed: u64) -> Result<Forest> {
    if !x.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let n = x.n_rows();
    let d = x.n_features();
    let mtry = ((d as f64).sqrt().floor() as usize).max(1);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut nodes = Vec::new();
        grow(x, &rows, mtry, &mut rng, &mut nodes);
        trees.push(Tree { nodes });
    }
    Ok(Forest { trees, n_features: d })
}

/// Random forest on raw features; the returned model carries its own scaler.
pub fn train_random_forest(x: &FeatureMatrix, n_trees: usize, seed: u64) -> Result<TrainedModel> {
    let scaler = fit_scaler(x)?;
    let xs = scaler.transform(x)?;
    let forest = fit_forest(&xs, n_trees, seed)?;
    Ok(TrainedModel::new(x.feature_names().to_vec(), scaler, Classifier::RandomForest(forest)))
}
