use ndarray::{Array1, Array2, Axis};

use crate::error::{NmfError, Result};
use crate::linalg::{check_matrix, DenseMatrix};
use crate::scalar::Scalar;

/// Symmetric nearest-neighbour graph over the samples (columns) of a data
/// matrix, with binary edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec<T> {
    /// `n x n`, symmetric, zero diagonal.
    pub adjacency: DenseMatrix<T>,
    /// Row sums of `adjacency`.
    pub degree: Array1<T>,
}

impl<T: Scalar> GraphSpec<T> {
    pub fn from_adjacency(adjacency: DenseMatrix<T>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(NmfError::dim("graph", format!("adjacency must be square, got {:?}", adjacency.dim())));
        }
        for i in 0..n {
            if adjacency[[i, i]] != T::zero() {
                return Err(NmfError::Input(format!("adjacency has a self loop at node {i}")));
            }
            for j in (i + 1)..n {
                if adjacency[[i, j]] != adjacency[[j, i]] {
                    return Err(NmfError::Input(format!("adjacency is not symmetric at ({i}, {j})")));
                }
            }
        }
        let degree = adjacency.sum_axis(Axis(1));
        Ok(GraphSpec { adjacency, degree })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn degree_matrix(&self) -> DenseMatrix<T> {
        Array2::from_diag(&self.degree)
    }

    /// `L = D − A`.
    pub fn laplacian(&self) -> DenseMatrix<T> {
        self.degree_matrix() - &self.adjacency
    }

    /// Smoothness penalty `Tr(H L Hᵀ)` for coefficients `H` (`r x n`).
    pub fn smoothness(&self, h: &DenseMatrix<T>) -> T {
        let ha = h.dot(&self.adjacency);
        let mut total = T::zero();
        for (row_h, row_ha) in h.rows().into_iter().zip(ha.rows()) {
            for ((&v, &va), &d) in row_h.iter().zip(row_ha.iter()).zip(self.degree.iter()) {
                total = total + v * (d * v - va);
            }
        }
        total
    }
}

/// Builds the binary `k`-nearest-neighbour graph of the columns of `x`.
///
/// `A_ij = 1` when `j` is among the `k` Euclidean nearest neighbours of `i`
/// or vice versa. Distance ties are broken by the smaller sample index.
pub fn build_knn_graph<T: Scalar>(x: &DenseMatrix<T>, k: usize) -> Result<GraphSpec<T>> {
    check_matrix(x, "X")?;
    let n = x.ncols();
    if k == 0 || k >= n {
        return Err(NmfError::param("graph_k", format!("need 1 <= k < n = {n}, got {k}")));
    }
    let sq_norms: Vec<T> = x.columns().into_iter().map(|c| c.dot(&c)).collect();
    let cross = x.t().dot(x);

    let mut adjacency = Array2::<T>::zeros((n, n));
    let mut order: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        for j in (0..n).filter(|&j| j != i) {
            let d = (sq_norms[i] + sq_norms[j] - T::lit(2.0) * cross[[i, j]]).max(T::zero());
            order.push((d, j));
        }
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in order.iter().take(k) {
            adjacency[[i, j]] = T::one();
            adjacency[[j, i]] = T::one();
        }
    }
    GraphSpec::from_adjacency(adjacency)
}
