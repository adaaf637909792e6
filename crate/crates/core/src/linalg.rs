//! Dense matrix kernels and the objective / gradient expressions shared by
//! every solver.
//!
//! Matrices are plain `ndarray::Array2` values. Data matrices are stored
//! features x samples (`m x n`), bases are `m x r`, coefficients `r x n`.
//! Products involving an `n x n` intermediate are always reassociated so the
//! cost stays linear in the sample count, e.g. `H Xᵀ X` is evaluated as
//! `(H Xᵀ) X` and `H Hᵀ H` as `(H Hᵀ) H`.

use ndarray::{Array2, Zip};

use crate::error::{NmfError, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix. Every routine in the crate expects finite entries.
pub type DenseMatrix<T> = Array2<T>;

/// Positive guard added to every multiplicative-update denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon<T>(T);

impl<T: Scalar> Epsilon<T> {
    pub const DEFAULT: f64 = 1e-12;

    pub fn new(eps: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(NmfError::param("eps", format!("must be positive and finite, got {eps}")));
        }
        Ok(Epsilon(eps))
    }

    /// Guard of exactly zero. Only useful for oracles and hand-checked
    /// arithmetic; solvers always use a positive guard.
    pub fn zero() -> Self {
        Epsilon(T::zero())
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

impl<T: Scalar> Default for Epsilon<T> {
    fn default() -> Self {
        Epsilon(T::lit(Self::DEFAULT))
    }
}

/// Rejects empty matrices and matrices holding NaN or infinities.
pub fn check_matrix<T: Scalar>(a: &DenseMatrix<T>, name: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(NmfError::Input(format!(
            "matrix {name} is empty ({}x{})",
            a.nrows(),
            a.ncols()
        )));
    }
    if let Some(pos) = a.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(NmfError::Input(format!(
            "matrix {name} has a non-finite entry at ({}, {})",
            pos.0 .0, pos.0 .1
        )));
    }
    Ok(())
}

pub fn is_nonnegative<T: Scalar>(a: &DenseMatrix<T>) -> bool {
    a.iter().all(|&v| v >= T::zero())
}

pub(crate) fn check_factor_shapes<T: Scalar>(
    op: &'static str,
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<()> {
    let (m, n) = x.dim();
    if w.nrows() != m || h.ncols() != n || w.ncols() != h.nrows() {
        return Err(NmfError::dim(
            op,
            format!(
                "X is {m}x{n}, W is {}x{}, H is {}x{}",
                w.nrows(),
                w.ncols(),
                h.nrows(),
                h.ncols()
            ),
        ));
    }
    Ok(())
}

/// Squared Frobenius norm, the sum of squared entries.
pub fn frobenius_sq<T: Scalar>(a: &DenseMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

/// `AᵀA`. Only the upper triangle is accumulated; the lower triangle is a
/// mirror, so the result is symmetric bit-for-bit.
pub fn gram<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut g = a.t().dot(a);
    let k = g.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            g[[j, i]] = g[[i, j]];
        }
    }
    g
}

/// One multiplicative step: `current ⊙ numerator / (denominator + eps)`.
pub fn mul_update_step<T: Scalar>(
    current: &DenseMatrix<T>,
    numerator: &DenseMatrix<T>,
    denominator: &DenseMatrix<T>,
    eps: Epsilon<T>,
) -> Result<DenseMatrix<T>> {
    if current.dim() != numerator.dim() || current.dim() != denominator.dim() {
        return Err(NmfError::dim(
            "mul_update_step",
            format!(
                "current {:?}, numerator {:?}, denominator {:?}",
                current.dim(),
                numerator.dim(),
                denominator.dim()
            ),
        ));
    }
    let eps = eps.get();
    Ok(Zip::from(current)
        .and(numerator)
        .and(denominator)
        .map_collect(|&c, &num, &den| {
            if c == T::zero() {
                T::zero()
            } else {
                c * num / (den + eps)
            }
        }))
}

/// Reconstruction error `‖X − WH‖²_F`.
pub fn objective_nmf<T: Scalar>(x: &DenseMatrix<T>, w: &DenseMatrix<T>, h: &DenseMatrix<T>) -> Result<T> {
    check_factor_shapes("objective_nmf", x, w, h)?;
    Ok(residual_sq(x, w, h))
}

pub(crate) fn residual_sq<T: Scalar>(x: &DenseMatrix<T>, w: &DenseMatrix<T>, h: &DenseMatrix<T>) -> T {
    let wh = w.dot(h);
    Zip::from(x)
        .and(&wh)
        .fold(T::zero(), |acc, &a, &b| acc + (a - b) * (a - b))
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(NmfError::param("lambda", format!("must be positive and finite, got {lambda}")));
    }
    Ok(())
}

/// Structure-preserving objective `‖X − WH‖²_F + ‖XᵀX − λHᵀH‖²_F`,
/// evaluated directly. Forms two `n x n` matrices; the solvers use
/// [`DspObjective`] instead, which is linear in `n`.
pub fn objective_dsp<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
    lambda: T,
) -> Result<T> {
    check_factor_shapes("objective_dsp", x, w, h)?;
    check_lambda(lambda)?;
    let xtx = gram(x);
    let hth = gram(h);
    let penalty = Zip::from(&xtx)
        .and(&hth)
        .fold(T::zero(), |acc, &a, &b| {
            let d = a - lambda * b;
            acc + d * d
        });
    Ok(residual_sq(x, w, h) + penalty)
}

/// Gradient of [`objective_dsp`] with respect to `H`:
/// `−2WᵀX + 2WᵀWH − 4λ(HXᵀ)X + 4λ²(HHᵀ)H`.
///
/// `lambda = 0` is accepted and yields the plain reconstruction gradient.
pub fn grad_h_dsp<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
    lambda: T,
) -> Result<DenseMatrix<T>> {
    check_factor_shapes("grad_h_dsp", x, w, h)?;
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(NmfError::param("lambda", format!("must be nonnegative, got {lambda}")));
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let wtx = w.t().dot(x);
    let wtwh = w.t().dot(w).dot(h);
    let hxtx = h.dot(&x.t()).dot(x);
    let hhth = h.dot(&h.t()).dot(h);
    Ok(wtwh * two - wtx * two - hxtx * (four * lambda) + hhth * (four * lambda * lambda))
}

/// Evaluator for the structure-preserving objective with cost `O(mnr)`.
///
/// Uses `‖XᵀX‖² = ‖XXᵀ‖²`, `Tr(XᵀX HᵀH) = ‖XHᵀ‖²` and
/// `Tr(HᵀH HᵀH) = ‖HHᵀ‖²`, so no `n x n` matrix is ever formed. The
/// constant `‖XXᵀ‖²` is computed once.
#[derive(Debug, Clone)]
pub struct DspObjective<T> {
    data_gram_sq: T,
    lambda: T,
}

impl<T: Scalar> DspObjective<T> {
    pub fn new(x: &DenseMatrix<T>, lambda: T) -> Result<Self> {
        check_lambda(lambda)?;
        let xxt = x.dot(&x.t());
        Ok(DspObjective {
            data_gram_sq: frobenius_sq(&xxt),
            lambda,
        })
    }

    pub fn eval(&self, x: &DenseMatrix<T>, w: &DenseMatrix<T>, h: &DenseMatrix<T>) -> T {
        let xht = x.dot(&h.t());
        let hht = h.dot(&h.t());
        let l = self.lambda;
        let penalty = self.data_gram_sq - T::lit(2.0) * l * frobenius_sq(&xht) + l * l * frobenius_sq(&hht);
        residual_sq(x, w, h) + penalty
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_sq(&Array2::<f64>::zeros((3, 4))), 0.0);
        assert_eq!(frobenius_sq(&array![[1.0, 2.0], [3.0, 4.0]]), 30.0);
        assert_eq!(frobenius_sq(&Array2::<f64>::eye(3)), 3.0);
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&Array2::<f64>::eye(2)), Array2::<f64>::eye(2));
        assert_eq!(gram(&array![[1.0, 2.0], [3.0, 4.0]]), array![[10.0, 14.0], [14.0, 20.0]]);
        assert_eq!(gram(&array![[1.0], [2.0], [2.0]]), array![[9.0]]);
    }

    #[test]
    fn mul_update_examples() {
        let c = array![[1.0]];
        let out = mul_update_step(&c, &array![[2.0]], &array![[4.0]], Epsilon::zero()).unwrap();
        assert_eq!(out, array![[0.5]]);

        let cur = array![[0.3, 1.2], [2.0, 0.7]];
        let num = array![[1.5, 0.2], [3.0, 9.0]];
        let out = mul_update_step(&cur, &num, &num, Epsilon::default()).unwrap();
        for (a, b) in out.iter().zip(cur.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-11);
        }

        let zero = Array2::<f64>::zeros((2, 2));
        let out = mul_update_step(&zero, &num, &num, Epsilon::default()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mul_update_shape_mismatch() {
        let a = Array2::<f64>::ones((2, 2));
        let b = Array2::<f64>::ones((2, 3));
        assert!(matches!(
            mul_update_step(&a, &b, &a, Epsilon::default()),
            Err(NmfError::Dimension { .. })
        ));
    }

    #[test]
    fn epsilon_rejects_nonpositive() {
        assert!(Epsilon::new(0.0f64).is_err());
        assert!(Epsilon::new(-1.0f64).is_err());
        assert_eq!(Epsilon::<f64>::default().get(), 1e-12);
    }

    #[test]
    fn objective_nmf_examples() {
        let w = array![[1.0, 0.5], [0.0, 2.0], [1.0, 1.0]];
        let h = array![[1.0, 0.0, 3.0], [0.5, 1.0, 0.0]];
        let x = w.dot(&h);
        assert_eq!(objective_nmf(&x, &w, &h).unwrap(), 0.0);
        assert_eq!(objective_nmf(&array![[1.0]], &array![[1.0]], &array![[0.0]]).unwrap(), 1.0);

        // Doubling the residual quadruples the objective.
        let x2 = &x + &array![[1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, 0.5]];
        let x3 = &x + &(array![[1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, 0.5]] * 2.0);
        let f2 = objective_nmf(&x2, &w, &h).unwrap();
        let f3 = objective_nmf(&x3, &w, &h).unwrap();
        assert_relative_eq!(f3, 4.0 * f2, max_relative = 1e-14);
    }

    #[test]
    fn objective_nmf_shape_mismatch() {
        let x = Array2::<f64>::ones((3, 4));
        let w = Array2::<f64>::ones((3, 2));
        let h = Array2::<f64>::ones((2, 5));
        assert!(objective_nmf(&x, &w, &h).is_err());
    }

    #[test]
    fn objective_dsp_zero_factors() {
        let x = array![[1.0, 2.0, 0.5], [0.0, 1.0, 3.0]];
        let w = Array2::<f64>::zeros((2, 1));
        let h = Array2::<f64>::zeros((1, 3));
        let expected = frobenius_sq(&x) + frobenius_sq(&gram(&x));
        for lambda in [0.01, 1.0, 250.0] {
            assert_relative_eq!(objective_dsp(&x, &w, &h, lambda).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn objective_dsp_rejects_nonpositive_lambda() {
        let x = Array2::<f64>::ones((2, 3));
        let w = Array2::<f64>::ones((2, 1));
        let h = Array2::<f64>::ones((1, 3));
        assert!(matches!(objective_dsp(&x, &w, &h, 0.0), Err(NmfError::Parameter { .. })));
        assert!(matches!(objective_dsp(&x, &w, &h, -1.0), Err(NmfError::Parameter { .. })));
    }

    #[test]
    fn objective_dsp_vanishes_on_exact_structure() {
        // W has orthogonal columns of squared norm λ, so XᵀX = HᵀWᵀWH = λHᵀH.
        let lambda: f64 = 4.0;
        let w = array![[2.0, 0.0], [0.0, 2.0], [0.0, 0.0]];
        let h = array![[1.0, 0.5, 0.0, 2.0], [0.0, 1.5, 1.0, 0.25]];
        let x = w.dot(&h);
        assert!(objective_dsp(&x, &w, &h, lambda).unwrap().abs() < 1e-20);
    }

    #[test]
    fn gradient_penalty_switch_off() {
        let x = array![[1.0, 2.0, 0.5], [0.2, 1.0, 3.0]];
        let w = array![[0.7, 0.1], [0.3, 0.9]];
        let h = array![[0.4, 0.5, 0.6], [0.9, 0.2, 0.8]];
        let g = grad_h_dsp(&x, &w, &h, 0.0).unwrap();
        let expected = w.t().dot(&w).dot(&h) * 2.0 - w.t().dot(&x) * 2.0;
        for (a, b) in g.iter().zip(expected.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-14);
        }
    }

    #[test]
    fn fast_objective_matches_direct() {
        let x = array![[1.0, 2.0, 0.5, 0.1], [0.2, 1.0, 3.0, 0.7], [0.4, 0.4, 0.9, 1.1]];
        let w = array![[0.7, 0.1], [0.3, 0.9], [0.5, 0.5]];
        let h = array![[0.4, 0.5, 0.6, 0.1], [0.9, 0.2, 0.8, 0.3]];
        for lambda in [0.01, 1.0, 1000.0] {
            let direct = objective_dsp(&x, &w, &h, lambda).unwrap();
            let fast = DspObjective::new(&x, lambda).unwrap().eval(&x, &w, &h);
            assert_relative_eq!(direct, fast, max_relative = 1e-10);
        }
    }

    #[test]
    fn check_matrix_rejects_nan() {
        let mut a = Array2::<f64>::ones((2, 2));
        a[[1, 0]] = f64::NAN;
        assert!(check_matrix(&a, "A").is_err());
        assert!(check_matrix(&Array2::<f64>::zeros((0, 2)), "A").is_err());
    }
}
