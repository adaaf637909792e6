//! Shared fixtures and naive reference implementations.
//!
//! The references use explicit index loops and share no code with the
//! library beyond the epsilon constant, so agreement is evidence rather than
//! tautology.
#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-12;

pub fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| lo + (hi - lo) * rng.random::<f64>())
}

pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, k) = a.dim();
    assert_eq!(k, b.nrows());
    let p = b.ncols();
    let mut out = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            let mut s = 0.0;
            for l in 0..k {
                s += a[[i, l]] * b[[l, j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

pub fn transpose(a: &Array2<f64>) -> Array2<f64> {
    let (n, m) = a.dim();
    Array2::from_shape_fn((m, n), |(i, j)| a[[j, i]])
}

fn step(cur: &Array2<f64>, num: &Array2<f64>, den: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(cur.dim(), |(i, j)| {
        if cur[[i, j]] == 0.0 {
            0.0
        } else {
            cur[[i, j]] * num[[i, j]] / (den[[i, j]] + EPS)
        }
    })
}

fn add_scaled(a: &Array2<f64>, c: f64, b: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(a.dim(), |(i, j)| a[[i, j]] + c * b[[i, j]])
}

pub fn ref_update_h_basic(x: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> Array2<f64> {
    let wt = transpose(w);
    step(h, &matmul(&wt, x), &matmul(&matmul(&wt, w), h))
}

/// `quartic` is the coefficient of `(HHᵀ)H` in the denominator.
pub fn ref_update_h_dsp(x: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>, lambda: f64, quartic: f64) -> Array2<f64> {
    let wt = transpose(w);
    let ht = transpose(h);
    let num = add_scaled(&matmul(&wt, x), 2.0 * lambda, &matmul(&matmul(h, &transpose(x)), x));
    let den = add_scaled(&matmul(&matmul(&wt, w), h), quartic, &matmul(&matmul(h, &ht), h));
    step(h, &num, &den)
}

pub fn ref_update_w(x: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> Array2<f64> {
    let ht = transpose(h);
    step(w, &matmul(x, &ht), &matmul(w, &matmul(h, &ht)))
}

/// Binary symmetric kNN adjacency by brute force over all pairs.
pub fn ref_knn_adjacency(x: &Array2<f64>, k: usize) -> Array2<f64> {
    let n = x.ncols();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((0..x.nrows()).map(|f| (x[[f, i]] - x[[f, j]]).powi(2)).sum(), j))
            .collect();
        d.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap().then(p.1.cmp(&q.1)));
        for &(_, j) in &d[..k] {
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
    }
    a
}

pub fn ref_update_gnmf(
    x: &Array2<f64>,
    w: &Array2<f64>,
    h: &Array2<f64>,
    adjacency: &Array2<f64>,
    weight: f64,
) -> (Array2<f64>, Array2<f64>) {
    let w1 = ref_update_w(x, w, h);
    let n = adjacency.nrows();
    let degree = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            (0..n).map(|l| adjacency[[i, l]]).sum()
        } else {
            0.0
        }
    });
    let wt = transpose(&w1);
    let num = add_scaled(&matmul(&wt, x), weight, &matmul(h, adjacency));
    let den = add_scaled(&matmul(&matmul(&wt, &w1), h), weight, &matmul(h, &degree));
    (w1, step(h, &num, &den))
}

pub fn ref_update_symm(a: &Array2<f64>, h: &Array2<f64>) -> Array2<f64> {
    step(h, &matmul(h, a), &matmul(&matmul(h, &transpose(h)), h))
}

/// `‖X − WH‖² + ‖XᵀX − λHᵀH‖²` with every product formed by loops.
pub fn ref_objective_dsp(x: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>, lambda: f64) -> f64 {
    let wh = matmul(w, h);
    let xtx = matmul(&transpose(x), x);
    let hth = matmul(&transpose(h), h);
    let fit: f64 = x.iter().zip(wh.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let pen: f64 = xtx.iter().zip(hth.iter()).map(|(a, b)| (a - lambda * b).powi(2)).sum();
    fit + pen
}

/// Largest entrywise relative difference, with `floor` guarding zeros.
pub fn max_rel_diff(a: &Array2<f64>, b: &Array2<f64>, floor: f64) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(p, q)| (p - q).abs() / p.abs().max(q.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Data matrix with `XᵀX = λHᵀH` exactly: `W` has orthogonal columns of
/// norm `√λ` (scaled coordinate vectors) and `X = WH`.
pub fn exact_structure(m: usize, n: usize, r: usize, lambda: f64, seed: u64) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    assert!(r <= m);
    let mut w = Array2::zeros((m, r));
    for c in 0..r {
        w[[c, c]] = lambda.sqrt();
    }
    let h = uniform(r, n, 0.1, 1.0, seed);
    (matmul(&w, &h), w, h)
}
