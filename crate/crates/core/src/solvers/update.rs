//! Single-step multiplicative update rules.
//!
//! Every rule has the form `current ⊙ numerator / (denominator + eps)` with
//! nonnegative numerator and denominator, so nonnegativity is preserved.

use ndarray::Axis;

use super::graph::GraphSpec;
use super::DspRule;
use crate::error::{NmfError, Result};
use crate::linalg::{check_factor_shapes, mul_update_step, DenseMatrix, Epsilon};
use crate::scalar::Scalar;

/// Lee-Seung coefficient update `H ⊙ WᵀX / (WᵀW H)`.
pub fn update_h_basic<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    check_factor_shapes("update_h_basic", x, w, h)?;
    let numerator = w.t().dot(x);
    let denominator = w.t().dot(w).dot(h);
    mul_update_step(h, &numerator, &denominator, Epsilon::default())
}

/// Structure-preserving coefficient update.
///
/// `AppendixConsistent`: `H ⊙ (WᵀX + 2λ(HXᵀ)X) / (WᵀWH + 2λ²(HHᵀ)H)`.
/// `MainText`: same numerator, `λ²` instead of `2λ²` in the denominator.
pub fn update_h_dsp<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
    lambda: T,
    rule: DspRule,
) -> Result<DenseMatrix<T>> {
    check_factor_shapes("update_h_dsp", x, w, h)?;
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(NmfError::param("lambda", format!("must be nonnegative, got {lambda}")));
    }
    let two = T::lit(2.0);
    let quartic_coef = match rule {
        DspRule::AppendixConsistent => two * lambda * lambda,
        DspRule::MainText => lambda * lambda,
    };

    let hxt = h.dot(&x.t());
    let mut numerator = w.t().dot(x);
    numerator.scaled_add(two * lambda, &hxt.dot(x));

    let hht = h.dot(&h.t());
    let mut denominator = w.t().dot(w).dot(h);
    denominator.scaled_add(quartic_coef, &hht.dot(h));

    mul_update_step(h, &numerator, &denominator, Epsilon::default())
}

/// Basis update `W ⊙ XHᵀ / (W HHᵀ)`, shared by every `X ≈ WH` model.
pub fn update_w<T: Scalar>(x: &DenseMatrix<T>, w: &DenseMatrix<T>, h: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    check_factor_shapes("update_w", x, w, h)?;
    let numerator = x.dot(&h.t());
    let denominator = w.dot(&h.dot(&h.t()));
    mul_update_step(w, &numerator, &denominator, Epsilon::default())
}

/// One graph-regularized step: `W` first from the current `H`, then
/// `H ⊙ (W'ᵀX + λ_g HA) / (W'ᵀW'H + λ_g HD)` with the fresh `W'`.
pub fn update_gnmf<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
    graph: &GraphSpec<T>,
    gnmf_lambda: T,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    check_factor_shapes("update_gnmf", x, w, h)?;
    if graph.len() != x.ncols() {
        return Err(NmfError::dim(
            "update_gnmf",
            format!("graph has {} nodes, data has {} samples", graph.len(), x.ncols()),
        ));
    }
    if gnmf_lambda < T::zero() || !gnmf_lambda.is_finite() {
        return Err(NmfError::param("gnmf_lambda", format!("must be nonnegative, got {gnmf_lambda}")));
    }
    let w_next = update_w(x, w, h)?;

    let mut numerator = w_next.t().dot(x);
    let mut denominator = w_next.t().dot(&w_next).dot(h);
    if gnmf_lambda > T::zero() {
        numerator.scaled_add(gnmf_lambda, &h.dot(&graph.adjacency));
        let hd = h * &graph.degree.view().insert_axis(Axis(0));
        denominator.scaled_add(gnmf_lambda, &hd);
    }
    let h_next = mul_update_step(h, &numerator, &denominator, Epsilon::default())?;
    Ok((w_next, h_next))
}

/// Symmetric factorization step `H ⊙ (HA) / ((HHᵀ)H)` for `A ≈ HᵀH`.
pub fn update_symm<T: Scalar>(a: &DenseMatrix<T>, h: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    check_similarity(a)?;
    if h.ncols() != a.nrows() {
        return Err(NmfError::dim(
            "update_symm",
            format!("A is {}x{}, H is {}x{}", a.nrows(), a.ncols(), h.nrows(), h.ncols()),
        ));
    }
    let numerator = h.dot(a);
    let denominator = h.dot(&h.t()).dot(h);
    mul_update_step(h, &numerator, &denominator, Epsilon::default())
}

pub(crate) fn check_similarity<T: Scalar>(a: &DenseMatrix<T>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(NmfError::dim(
            "update_symm",
            format!("similarity matrix must be square, got {}x{}", n, a.ncols()),
        ));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (p, q) = (a[[i, j]], a[[j, i]]);
            let scale = T::one() + p.abs().max(q.abs());
            if (p - q).abs() > T::lit(1e-12) * scale {
                return Err(NmfError::Input(format!(
                    "similarity matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::graph::build_knn_graph;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};

    fn sample() -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let w = array![[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.3, 0.0]];
        let h = array![[0.4, 0.5, 0.6, 0.1, 0.0, 0.7], [0.9, 0.2, 0.8, 0.3, 1.0, 0.2]];
        let x = w.dot(&h) + 0.05;
        (x, w, h)
    }

    #[test]
    fn dsp_fixed_point_on_exact_structure() {
        // Orthogonal W columns of squared norm λ: X = WH and XᵀX = λHᵀH.
        let lambda: f64 = 9.0;
        let w = array![[3.0, 0.0], [0.0, 3.0], [0.0, 0.0]];
        let h = array![[1.0, 0.5, 0.2, 2.0], [0.3, 1.5, 1.0, 0.25]];
        let x = w.dot(&h);
        let next = update_h_dsp(&x, &w, &h, lambda, DspRule::AppendixConsistent).unwrap();
        for (a, b) in next.iter().zip(h.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-10);
        }
    }

    #[test]
    fn dsp_small_lambda_matches_basic() {
        let (x, w, h) = sample();
        let dsp = update_h_dsp(&x, &w, &h, 1e-12, DspRule::AppendixConsistent).unwrap();
        let basic = update_h_basic(&x, &w, &h).unwrap();
        for (a, b) in dsp.iter().zip(basic.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-6);
        }
    }

    #[test]
    fn main_text_rule_differs_from_default() {
        let (x, w, h) = sample();
        let a = update_h_dsp(&x, &w, &h, 1.0, DspRule::AppendixConsistent).unwrap();
        let b = update_h_dsp(&x, &w, &h, 1.0, DspRule::MainText).unwrap();
        assert!(a.iter().zip(b.iter()).any(|(p, q)| (p - q).abs() > 1e-6));
        // Smaller denominator means every positive entry grows at least as much.
        assert!(a.iter().zip(b.iter()).all(|(p, q)| q >= p));
    }

    #[test]
    fn w_update_fixed_point_and_zero() {
        let (_, w, h) = sample();
        let x = w.dot(&h);
        let next = update_w(&x, &w, &h).unwrap();
        for (a, b) in next.iter().zip(w.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-10);
        }
        let zero = Array2::<f64>::zeros(w.dim());
        assert!(update_w(&x, &zero, &h).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gnmf_without_penalty_is_basic_step() {
        let (x, w, h) = sample();
        let graph = build_knn_graph(&x, 2).unwrap();
        let (w1, h1) = update_gnmf(&x, &w, &h, &graph, 0.0).unwrap();
        let w_ref = update_w(&x, &w, &h).unwrap();
        let h_ref = update_h_basic(&x, &w_ref, &h).unwrap();
        assert_eq!(w1, w_ref);
        assert_eq!(h1, h_ref);
    }

    #[test]
    fn gnmf_fixed_point_without_penalty() {
        let (_, w, h) = sample();
        let x = w.dot(&h);
        let graph = build_knn_graph(&x, 2).unwrap();
        let (w1, h1) = update_gnmf(&x, &w, &h, &graph, 0.0).unwrap();
        for (a, b) in w1.iter().zip(w.iter()).chain(h1.iter().zip(h.iter())) {
            assert_relative_eq!(*a, *b, max_relative = 1e-10);
        }
    }

    #[test]
    fn symm_fixed_point_and_zero() {
        let h = array![[0.4, 0.5, 0.6, 0.1], [0.9, 0.2, 0.8, 0.3]];
        let a = h.t().dot(&h);
        let next = update_symm(&a, &h).unwrap();
        for (p, q) in next.iter().zip(h.iter()) {
            assert_relative_eq!(*p, *q, max_relative = 1e-10);
        }
        let zero = Array2::<f64>::zeros((2, 4));
        assert!(update_symm(&a, &zero).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symm_rejects_bad_similarity() {
        let h = Array2::<f64>::ones((2, 3));
        assert!(update_symm(&Array2::<f64>::ones((3, 4)), &h).is_err());
        let mut a = Array2::<f64>::ones((3, 3));
        a[[0, 2]] = 2.0;
        assert!(update_symm(&a, &h).is_err());
    }

    #[test]
    fn updates_reject_shape_mismatch() {
        let (x, w, h) = sample();
        let bad_h = Array2::<f64>::ones((3, 6));
        assert!(update_h_basic(&x, &w, &bad_h).is_err());
        assert!(update_h_dsp(&x, &w, &bad_h, 1.0, DspRule::AppendixConsistent).is_err());
        assert!(update_w(&x, &w, &bad_h).is_err());
        let _ = h;
    }
}
