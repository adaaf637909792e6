use super::FactorPair;
use crate::error::{NmfError, Result};
use crate::linalg::{gram, DenseMatrix};
use crate::scalar::Scalar;

/// Rescales every column of `W` to unit Euclidean length and multiplies the
/// matching row of `H` by the removed norm, leaving `WH` unchanged.
///
/// Pairs without a basis (symmetric factorization) are returned as is.
pub fn normalize_factors<T: Scalar>(pair: &FactorPair<T>) -> Result<FactorPair<T>> {
    let Some(w) = pair.w.as_ref() else {
        return Ok(pair.clone());
    };
    if w.ncols() != pair.h.nrows() {
        return Err(NmfError::dim(
            "normalize_factors",
            format!("W has {} columns, H has {} rows", w.ncols(), pair.h.nrows()),
        ));
    }
    let mut w = w.clone();
    let mut h = pair.h.clone();
    for (col_idx, (mut col, mut row)) in w.columns_mut().into_iter().zip(h.rows_mut()).enumerate() {
        let norm = col.dot(&col).sqrt();
        if norm == T::zero() {
            return Err(NmfError::DegenerateFactor { column: col_idx });
        }
        if norm == T::one() {
            continue;
        }
        col.mapv_inplace(|v| v / norm);
        row.mapv_inplace(|v| v * norm);
    }
    Ok(FactorPair { w: Some(w), h })
}

/// How far `WᵀW` is from a multiple of the identity.
///
/// Returns `(lambda_hat, deviation)` with `lambda_hat` the mean diagonal of
/// `WᵀW` and `deviation = ‖WᵀW − lambda_hat·I‖_F / (lambda_hat·√r)`.
pub fn diag_deviation<T: Scalar>(w: &DenseMatrix<T>) -> Result<(T, T)> {
    let r = w.ncols();
    if r == 0 || w.iter().all(|&v| v == T::zero()) {
        return Err(NmfError::Input("diag_deviation needs a nonzero W".into()));
    }
    let g = gram(w);
    let lambda_hat = g.diag().sum() / T::lit(r as f64);
    let mut off = T::zero();
    for ((i, j), &v) in g.indexed_iter() {
        let d = if i == j { v - lambda_hat } else { v };
        off = off + d * d;
    }
    Ok((lambda_hat, off.sqrt() / (lambda_hat * T::lit(r as f64).sqrt())))
}
