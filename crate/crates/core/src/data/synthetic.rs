use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::error::{NmfError, Result};
use crate::evaluation::LabelVector;
use crate::scalar::Scalar;

/// `k` isotropic unit-variance Gaussian clusters in `m` dimensions, `n`
/// samples in total, stored features x samples.
///
/// Cluster `c` is centred at `separation/√2 · e_(c mod m)` shifted by
/// `(c div m) · separation` along every axis, so distinct centres are at
/// least `separation` apart and all centres are nonnegative. Sample `j`
/// belongs to cluster `j mod k`. Negative draws are clipped to zero.
pub fn synthetic_blobs<T: Scalar>(m: usize, n: usize, k: usize, separation: f64, seed: u64) -> Result<Dataset<T>> {
    if m == 0 || n == 0 || k == 0 {
        return Err(NmfError::param("synthetic_blobs", format!("need m, n, k >= 1, got {m}, {n}, {k}")));
    }
    if k > n {
        return Err(NmfError::param("k", format!("{k} clusters for {n} samples")));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(NmfError::param("separation", format!("must be positive, got {separation}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spike = separation / 2f64.sqrt();
    let labels: Vec<usize> = (0..n).map(|j| j % k).collect();
    let mut x = Array2::<T>::zeros((m, n));
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let c = labels[j];
        let shift = (c / m) as f64 * separation;
        for (i, v) in col.iter_mut().enumerate() {
            let centre = shift + if i == c % m { spike } else { 0.0 };
            let noise: f64 = StandardNormal.sample(&mut rng);
            *v = T::lit((centre + noise).max(0.0));
        }
    }
    Dataset::new(format!("blobs_{m}x{n}_k{k}"), x, Some(LabelVector::new(labels)))
}
