use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{accuracy, knn_classify, KnnConfig, LabelVector};
use crate::error::{NmfError, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Fold index per sample.
///
/// Stratified: each class is shuffled and dealt round-robin, with the dealing
/// position carried over between classes, so per-class fold sizes differ by at
/// most one and so do total fold sizes. When `folds` equals the sample count
/// stratification is impossible and sample `i` forms fold `i`.
pub fn stratified_folds(labels: &LabelVector, folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(NmfError::param("folds", format!("need 2 <= folds <= {n}, got {folds}")));
    }
    if folds == n {
        return Ok((0..n).collect());
    }
    let counts = labels.class_counts();
    if let Some((class, &size)) = counts.iter().enumerate().find(|(_, &c)| c > 0 && c < folds) {
        return Err(NmfError::ClassTooSmall { class, size, folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut position = 0usize;
    for class in 0..labels.num_classes() {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels.as_slice()[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = position % folds;
            position += 1;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold cross-validation of a kNN classifier on the columns of
/// `x`; returns one accuracy per fold.
pub fn kfold_cv<T: Scalar>(
    x: &DenseMatrix<T>,
    labels: &LabelVector,
    folds: usize,
    seed: u64,
    classifier: &KnnConfig,
) -> Result<Vec<f64>> {
    if x.ncols() != labels.len() {
        return Err(NmfError::dim(
            "kfold_cv",
            format!("{} samples but {} labels", x.ncols(), labels.len()),
        ));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let mut scores = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
            (0..x.ncols()).partition(|&i| assignment[i] == fold);
        let train = x.select(Axis(1), &train_idx);
        let test = x.select(Axis(1), &test_idx);
        let pred = knn_classify(&train, &labels.select(&train_idx), &test, classifier.k)?;
        scores.push(accuracy(&pred, &labels.select(&test_idx))?);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn labels(sizes: &[usize]) -> LabelVector {
        let mut v = Vec::new();
        for (c, &s) in sizes.iter().enumerate() {
            v.extend(std::iter::repeat_n(c, s));
        }
        LabelVector::new(v)
    }

    #[test]
    fn fold_sizes_balanced_per_class() {
        let lv = labels(&[13, 7, 22]);
        let assignment = stratified_folds(&lv, 5, 3).unwrap();
        for class in 0..3 {
            let mut per_fold = [0usize; 5];
            for (i, &f) in assignment.iter().enumerate() {
                if lv.as_slice()[i] == class {
                    per_fold[f] += 1;
                }
            }
            let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
            assert!(hi - lo <= 1, "class {class}: {per_fold:?}");
        }
    }

    #[test]
    fn small_class_is_named() {
        let lv = labels(&[10, 3]);
        match stratified_folds(&lv, 5, 0) {
            Err(NmfError::ClassTooSmall { class, size, folds }) => assert_eq!((class, size, folds), (1, 3, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn leave_one_out() {
        let lv = labels(&[3, 3]);
        let x = Array2::from_shape_fn((1, 6), |(_, j)| if j < 3 { j as f64 * 0.1 } else { 10.0 + j as f64 });
        let scores = kfold_cv(&x, &lv, 6, 0, &KnnConfig { k: 1 }).unwrap();
        assert_eq!(scores.len(), 6);
        assert!(scores.iter().all(|&s| s == 0.0 || s == 1.0));
    }
}
