//! Dataset ingestion, preprocessing and synthetic fixtures.

mod csv_io;
mod manifest;
mod preprocess;
mod synthetic;

pub use csv_io::{load_csv, write_csv, LabelColumn, Orientation};
pub use manifest::DatasetManifest;
pub use preprocess::{minmax_normalize, stratified_sample};
pub use synthetic::synthetic_blobs;

use crate::error::{NmfError, Result};
use crate::evaluation::LabelVector;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// A data matrix stored features x samples, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub name: String,
    /// `m x n`: one column per sample.
    pub x: DenseMatrix<T>,
    pub labels: Option<LabelVector>,
    pub feature_names: Option<Vec<String>>,
    /// Original label values, indexed by class id.
    pub class_names: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(name: impl Into<String>, x: DenseMatrix<T>, labels: Option<LabelVector>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != x.ncols() {
                return Err(NmfError::dim(
                    "dataset",
                    format!("{} samples but {} labels", x.ncols(), l.len()),
                ));
            }
        }
        Ok(Dataset {
            name: name.into(),
            x,
            labels,
            feature_names: None,
            class_names: None,
        })
    }

    pub fn num_features(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.x.ncols()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.num_classes())
    }

    pub fn require_labels(&self) -> Result<&LabelVector> {
        self.labels
            .as_ref()
            .ok_or_else(|| NmfError::Input(format!("dataset `{}` has no labels", self.name)))
    }

    /// Copy with min-max normalized features.
    pub fn normalized(&self) -> Self {
        Dataset {
            x: minmax_normalize(&self.x),
            ..self.clone()
        }
    }
}
