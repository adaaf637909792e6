use ndarray::Array2;

use super::LabelVector;
use crate::error::{NmfError, Result};
use crate::linalg::{check_matrix, DenseMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 3 }
    }
}

/// Majority vote among the `k` Euclidean nearest training columns.
///
/// Distance ties go to the lower training index; vote ties to the smaller
/// class index.
pub fn knn_classify<T: Scalar>(
    train: &DenseMatrix<T>,
    train_labels: &LabelVector,
    test: &DenseMatrix<T>,
    k: usize,
) -> Result<LabelVector> {
    check_matrix(train, "train")?;
    check_matrix(test, "test")?;
    if train.nrows() != test.nrows() {
        return Err(NmfError::dim(
            "knn_classify",
            format!("train has {} features, test has {}", train.nrows(), test.nrows()),
        ));
    }
    if train_labels.len() != train.ncols() {
        return Err(NmfError::dim(
            "knn_classify",
            format!("{} training samples but {} labels", train.ncols(), train_labels.len()),
        ));
    }
    if k == 0 || k > train.ncols() {
        return Err(NmfError::param(
            "k",
            format!("need 1 <= k <= {} training samples, got {k}", train.ncols()),
        ));
    }
    let train_f: Array2<f64> = train.t().mapv(|v| v.as_f64());
    let test_f: Array2<f64> = test.t().mapv(|v| v.as_f64());
    let classes = train_labels.num_classes();
    let labels = train_labels.as_slice();

    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(train_f.nrows());
    let mut votes = vec![0usize; classes];
    let mut out = Vec::with_capacity(test_f.nrows());
    for query in test_f.rows() {
        dist.clear();
        for (j, row) in train_f.rows().into_iter().enumerate() {
            let d: f64 = row.iter().zip(query.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            dist.push((d, j));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        votes.iter_mut().for_each(|v| *v = 0);
        for &(_, j) in &dist[..k] {
            votes[labels[j]] += 1;
        }
        // max_by_key keeps the last maximum; scan for the first instead.
        let mut winner = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[winner] {
                winner = c;
            }
        }
        out.push(winner);
    }
    LabelVector::with_classes(out, classes)
}
