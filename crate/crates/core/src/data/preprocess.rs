use std::collections::HashMap;

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{NmfError, Result};
use crate::evaluation::LabelVector;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Maps every feature (row) affinely onto `[0, 1]`. Constant rows become zero.
pub fn minmax_normalize<T: Scalar>(x: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let lo = row.iter().copied().fold(T::infinity(), T::min);
        let hi = row.iter().copied().fold(T::neg_infinity(), T::max);
        let range = hi - lo;
        if range > T::zero() {
            row.mapv_inplace(|v| (v - lo) / range);
        } else {
            row.fill(T::zero());
        }
    }
    out
}

/// Per-class random subsample without replacement.
///
/// Keeps `ceil(fraction * size)` samples of each class, in their original
/// order, after dropping classes smaller than `min_class_size`. Surviving
/// classes are re-indexed in first-occurrence order.
pub fn stratified_sample<T: Scalar>(
    d: &Dataset<T>,
    fraction: f64,
    seed: u64,
    min_class_size: Option<usize>,
) -> Result<Dataset<T>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(NmfError::param("sample_fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let labels = d.require_labels()?;
    let counts = labels.class_counts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for (class, &size) in counts.iter().enumerate() {
        if size == 0 || min_class_size.is_some_and(|min| size < min) {
            continue;
        }
        // The small slack stops products like 0.1 * 30 from rounding up.
        let take = ((fraction * size as f64) - 1e-9).ceil().max(1.0) as usize;
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels.as_slice()[i] == class).collect();
        members.shuffle(&mut rng);
        keep.extend_from_slice(&members[..take.min(size)]);
    }
    keep.sort_unstable();
    if keep.is_empty() {
        return Err(NmfError::Input(format!("no class of `{}` survives subsampling", d.name)));
    }

    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut new_labels = Vec::with_capacity(keep.len());
    for &i in &keep {
        let old = labels.as_slice()[i];
        let next = remap.len();
        new_labels.push(*remap.entry(old).or_insert(next));
    }
    let class_names = d.class_names.as_ref().map(|names| {
        let mut out = vec![String::new(); remap.len()];
        for (&old, &new) in &remap {
            out[new] = names[old].clone();
        }
        out
    });
    Ok(Dataset {
        name: d.name.clone(),
        x: d.x.select(Axis(1), &keep),
        labels: Some(LabelVector::new(new_labels)),
        feature_names: d.feature_names.clone(),
        class_names,
    })
}
