//! Deterministic train/test splitting, stratified per image or grouped
//! by subject so paired images cannot straddle the split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ml::data::FeatureMatrix;

/// Whether the split boundary runs between subjects or between images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// All images of one subject land on the same side. The defensible
    /// protocol for paired data; the default.
    Subject,
    /// Plain stratified per-image split.
    Image,
}

fn check_fraction(test_fraction: f64) -> Result<()> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::BadTestFraction(test_fraction));
    }
    Ok(())
}

/// Stratified per-image split; class proportions in the test set stay
/// within one sample of the overall proportions. Deterministic per seed.
pub fn split_dataset(
    x: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    check_fraction(test_fraction)?;
    let n = x.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows { need: 4, got: n });
    }
    let test_total = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);

    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        by_class[x.label(i) as usize].push(i);
    }
    // largest-remainder apportionment of the test quota over classes
    let mut quota = [0usize; 2];
    let mut remainder = [0.0f64; 2];
    for c in 0..2 {
        let ideal = by_class[c].len() as f64 * test_fraction;
        quota[c] = ideal.floor() as usize;
        remainder[c] = ideal - ideal.floor();
    }
    let mut extra = test_total.saturating_sub(quota[0] + quota[1]);
    let order = if remainder[1] > remainder[0] { [1, 0] } else { [0, 1] };
    while extra > 0 {
        let mut placed = false;
        for &c in &order {
            if extra > 0 && quota[c] < by_class[c].len() {
                quota[c] += 1;
                extra -= 1;
                placed = true;
            }
        }
        if !placed {
            break;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_rows = Vec::new();
    let mut train_rows = Vec::new();
    for c in 0..2 {
        let mut indices = by_class[c].clone();
        indices.shuffle(&mut rng);
        test_rows.extend_from_slice(&indices[..quota[c]]);
        train_rows.extend_from_slice(&indices[quota[c]..]);
    }
    // manifest order within each side keeps downstream output stable
    test_rows.sort_unstable();
    train_rows.sort_unstable();
    Ok((x.take_rows(&train_rows), x.take_rows(&test_rows)))
}

/// Subject-grouped split: whole subjects are assigned to the test side.
/// The subject count is rounded to the nearest whole subject.
pub fn split_dataset_by_subject(
    x: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    check_fraction(test_fraction)?;
    let n = x.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows { need: 4, got: n });
    }
    let mut subjects: Vec<&str> = Vec::new();
    for i in 0..n {
        let s = x.subject(i);
        if !subjects.contains(&s) {
            subjects.push(s);
        }
    }
    if subjects.len() < 2 {
        return Err(Error::TooFewRows { need: 2, got: subjects.len() });
    }
    let n_test = ((subjects.len() as f64 * test_fraction + 0.5).floor() as usize)
        .clamp(1, subjects.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = subjects.clone();
    shuffled.shuffle(&mut rng);
    let test_subjects: Vec<&str> = shuffled[..n_test].to_vec();

    let mut test_rows = Vec::new();
    let mut train_rows = Vec::new();
    for i in 0..n {
        if test_subjects.contains(&x.subject(i)) {
            test_rows.push(i);
        } else {
            train_rows.push(i);
        }
    }
    Ok((x.take_rows(&train_rows), x.take_rows(&test_rows)))
}

/// Dispatch on the configured mode.
pub fn split_with_mode(
    x: &FeatureMatrix,
    mode: SplitMode,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    match mode {
        SplitMode::Subject => split_dataset_by_subject(x, test_fraction, seed),
        SplitMode::Image => split_dataset(x, test_fraction, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Paired dataset: `pairs` subjects, each with one good and one bad
    /// image, single synthetic feature.
    fn paired(pairs: usize) -> FeatureMatrix {
        let mut ids = Vec::new();
        let mut subjects = Vec::new();
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for p in 0..pairs {
            for (suffix, label) in [("good", 1u8), ("bad", 0u8)] {
                ids.push(format!("s{p:02}_{suffix}"));
                subjects.push(format!("s{p:02}"));
                labels.push(label);
                data.push(p as f64 + label as f64 * 0.5);
            }
        }
        FeatureMatrix::new(vec!["f".into()], ids, subjects, labels, data).unwrap()
    }

    #[test]
    fn thirty_six_rows_split_27_9() {
        let x = paired(18);
        let (train, test) = split_dataset(&x, 0.25, 7).unwrap();
        assert_eq!(train.n_rows(), 27);
        assert_eq!(test.n_rows(), 9);
        // stratification: 18 of each class, quota 4.5 each, one class
        // rounds up
        let pos = test.class_count(1);
        assert!(pos == 4 || pos == 5);
    }

    #[test]
    fn same_seed_reproduces_the_split() {
        let x = paired(10);
        let a = split_dataset(&x, 0.25, 42).unwrap();
        let b = split_dataset(&x, 0.25, 42).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = split_dataset(&x, 0.25, 43).unwrap();
        assert!(c.1 != a.1, "different seed should move the split");
    }

    #[test]
    fn bad_fractions_rejected() {
        let x = paired(4);
        for f in [0.0, 1.0, -0.5, 2.0] {
            assert!(matches!(
                split_dataset(&x, f, 1),
                Err(Error::BadTestFraction(_))
            ));
            assert!(matches!(
                split_dataset_by_subject(&x, f, 1),
                Err(Error::BadTestFraction(_))
            ));
        }
    }

    #[test]
    fn subject_split_keeps_pairs_together() {
        let x = paired(18);
        let (train, test) = split_dataset_by_subject(&x, 0.25, 3).unwrap();
        // 18 subjects at 25% rounds to 5 test subjects = 10 images
        assert_eq!(test.n_rows(), 10);
        assert_eq!(train.n_rows(), 26);
        for side in [&train, &test] {
            for i in 0..side.n_rows() {
                let subject = side.subject(i).to_string();
                let other = side.id(i).replace("good", "x").replace("bad", "x");
                let _ = other;
                // every subject must appear exactly twice on its side
                let count = (0..side.n_rows())
                    .filter(|&j| side.subject(j) == subject)
                    .count();
                assert_eq!(count, 2, "{subject} split across sides");
            }
        }
    }

    #[test]
    fn disjoint_and_complete() {
        let x = paired(9);
        let (train, test) = split_dataset(&x, 0.25, 11).unwrap();
        let mut seen: Vec<&str> = Vec::new();
        for side in [&train, &test] {
            for i in 0..side.n_rows() {
                assert!(!seen.contains(&side.id(i)), "duplicate {}", side.id(i));
                seen.push(side.id(i));
            }
        }
        assert_eq!(seen.len(), 18);
    }

    proptest! {
        #[test]
        fn stratification_within_one_sample(
            pairs in 3usize..25,
            seed in any::<u64>(),
            fraction in 0.15f64..0.5,
        ) {
            let x = paired(pairs);
            let (_, test) = split_dataset(&x, fraction, seed).unwrap();
            let n = x.n_rows() as f64;
            let overall_pos = x.class_count(1) as f64 / n;
            let test_pos = test.class_count(1) as f64;
            let ideal = test.n_rows() as f64 * overall_pos;
            prop_assert!((test_pos - ideal).abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn subject_split_is_deterministic(pairs in 3usize..20, seed in any::<u64>()) {
            let x = paired(pairs);
            let a = split_dataset_by_subject(&x, 0.25, seed).unwrap();
            let b = split_dataset_by_subject(&x, 0.25, seed).unwrap();
            prop_assert_eq!(a.1, b.1);
        }
    }
}
