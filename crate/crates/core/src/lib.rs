//! Nonnegative matrix factorization with a data-structure-preserving penalty.
//!
//! The central model factorizes a nonnegative data matrix `X` (features x
//! samples) as `X ≈ WH` while asking the sample similarities of the reduced
//! data to match those of the input up to a scale:
//!
//! ```text
//! minimize ‖X − WH‖²_F + ‖XᵀX − λHᵀH‖²_F   subject to W, H >= 0
//! ```
//!
//! Baselines (plain NMF, graph-regularized NMF, symmetric NMF), clustering
//! and classification metrics, CSV ingestion and a sweep harness live
//! alongside it.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` case.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod scalar;
pub mod solvers;

pub use error::{NmfError, Result};
pub use scalar::Scalar;

/// `f64` dense matrix.
pub type Matrix = linalg::DenseMatrix<f64>;
/// `f32` dense matrix.
pub type MatrixF32 = linalg::DenseMatrix<f32>;
/// `f64` factorization.
pub type Factors = solvers::FactorPair<f64>;
/// `f64` nearest-neighbour graph.
pub type Graph = solvers::GraphSpec<f64>;
/// Dataset with `f64` features.
pub type Data = data::Dataset<f64>;
