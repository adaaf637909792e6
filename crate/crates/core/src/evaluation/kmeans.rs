//! Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabelVector;
use crate::error::{NmfError, Result};
use crate::linalg::{check_matrix, DenseMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: LabelVector,
    /// `k x d`, one centroid per row.
    pub centroids: Array2<f64>,
    /// Within-cluster sum of squares of the returned labelling.
    pub wcss: f64,
    /// WCSS after every assignment step of the winning restart.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

/// Clusters the columns of `points` into `k` groups.
pub fn kmeans<T: Scalar>(points: &DenseMatrix<T>, k: usize, seed: u64, restarts: usize) -> Result<LabelVector> {
    let config = KMeansConfig {
        restarts,
        ..KMeansConfig::new(k, seed)
    };
    kmeans_fit(points, &config).map(|f| f.labels)
}

pub fn kmeans_fit<T: Scalar>(points: &DenseMatrix<T>, config: &KMeansConfig) -> Result<KMeansFit> {
    check_matrix(points, "points")?;
    let n = points.ncols();
    let k = config.k;
    if k == 0 || k > n {
        return Err(NmfError::param("k", format!("need 1 <= k <= n = {n}, got {k}")));
    }
    if config.restarts == 0 || config.max_iter == 0 {
        return Err(NmfError::param("restarts", "restarts and max_iter must be positive"));
    }
    // Samples as rows.
    let samples: Array2<f64> = points.t().mapv(|v| v.as_f64());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut best: Option<KMeansFit> = None;
    for _ in 0..config.restarts {
        let centroids = plus_plus_init(&samples, k, &mut rng);
        let fit = lloyd(&samples, centroids, config.max_iter, config.tol);
        if best.as_ref().is_none_or(|b| fit.wcss < b.wcss) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(samples: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = samples.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut closest: Vec<f64> = (0..n)
        .map(|i| sq_dist(samples.row(i), samples.row(chosen[0])))
        .collect();

    while chosen.len() < k {
        let total: f64 = closest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc >= target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just above the final sum.
            pick.unwrap_or_else(|| closest.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // Every point coincides with a centre; take any unused index.
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(samples.row(i), samples.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, samples.ncols()));
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).assign(&samples.row(i));
    }
    centroids
}

fn assign(samples: &Array2<f64>, centroids: &Array2<f64>, labels: &mut [usize]) -> f64 {
    let mut wcss = 0.0;
    for (i, row) in samples.rows().into_iter().enumerate() {
        let mut best = (f64::INFINITY, 0);
        for (c, centre) in centroids.rows().into_iter().enumerate() {
            let d = sq_dist(row, centre);
            if d < best.0 {
                best = (d, c);
            }
        }
        labels[i] = best.1;
        wcss += best.0;
    }
    wcss
}

fn lloyd(samples: &Array2<f64>, mut centroids: Array2<f64>, max_iter: usize, tol: f64) -> KMeansFit {
    let (n, d) = samples.dim();
    let k = centroids.nrows();
    let mut labels = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut wcss = 0.0;

    for _ in 0..max_iter {
        iterations += 1;
        wcss = assign(samples, &centroids, &mut labels);
        history.push(wcss);

        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += &samples.row(i);
        }
        let mut max_shift: f64 = 0.0;
        for (c, &count) in counts.iter().enumerate() {
            // Empty clusters keep their previous centroid.
            if count == 0 {
                continue;
            }
            let new_centre = sums.row(c).mapv(|v| v / count as f64);
            max_shift = max_shift.max(sq_dist(new_centre.view(), centroids.row(c)).sqrt());
            centroids.row_mut(c).assign(&new_centre);
        }
        if max_shift <= tol {
            break;
        }
    }
    KMeansFit {
        labels: LabelVector::with_classes(labels, k).expect("labels below k"),
        centroids,
        wcss,
        wcss_history: history,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::nmi;
    use ndarray::array;

    fn two_blobs() -> (Array2<f64>, LabelVector) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Array2::<f64>::zeros((2, 40));
        let mut truth = Vec::new();
        for j in 0..40 {
            let c = j % 2;
            let centre = if c == 0 { 0.0 } else { 50.0 };
            pts[[0, j]] = centre + rng.random::<f64>();
            pts[[1, j]] = centre + rng.random::<f64>();
            truth.push(c);
        }
        (pts, LabelVector::new(truth))
    }

    #[test]
    fn separates_blobs() {
        let (pts, truth) = two_blobs();
        let labels = kmeans(&pts, 2, 0, 10).unwrap();
        assert_eq!(nmi(&labels, &truth).unwrap(), 1.0);
    }

    #[test]
    fn k_equals_n_is_exact() {
        let pts = array![[0.0, 1.0, 5.0, 5.0], [0.0, 2.0, 1.0, 1.0]];
        let fit = kmeans_fit(&pts, &KMeansConfig::new(4, 9)).unwrap();
        assert_eq!(fit.wcss, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let (pts, _) = two_blobs();
        let a = kmeans_fit(&pts, &KMeansConfig::new(3, 5)).unwrap();
        let b = kmeans_fit(&pts, &KMeansConfig::new(3, 5)).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.wcss, b.wcss);
    }

    #[test]
    fn wcss_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts = Array2::from_shape_fn((3, 120), |_| rng.random::<f64>());
        let fit = kmeans_fit(&pts, &KMeansConfig::new(6, 1)).unwrap();
        for w in fit.wcss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn rejects_too_many_clusters() {
        let pts = array![[0.0, 1.0]];
        assert!(kmeans(&pts, 3, 0, 1).is_err());
    }
}
