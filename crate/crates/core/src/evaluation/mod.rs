//! Quality of a reduced representation: k-means clustering scored by NMI,
//! kNN classification scored by accuracy under stratified k-fold
//! cross-validation, and mean/max statistics over repeated runs.

mod cv;
mod kmeans;
mod knn;
mod labels;
mod metrics;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cv::{kfold_cv, stratified_folds};
pub use kmeans::{kmeans, kmeans_fit, KMeansConfig, KMeansFit};
pub use knn::{knn_classify, KnnConfig};
pub use labels::LabelVector;
pub use metrics::{accuracy, nmi, nmi_with, run_stats, NmiNormalization};

use crate::error::{NmfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// K-means NMI against the ground truth.
    Nmi,
    /// Mean kNN accuracy over the cross-validation folds.
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Nmi, Metric::Accuracy];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Nmi => "nmi",
            Metric::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nmi" => Ok(Metric::Nmi),
            "accuracy" | "acc" => Ok(Metric::Accuracy),
            other => Err(NmfError::param("metric", format!("unknown metric `{other}`"))),
        }
    }
}

/// Per-run scores of one (dataset, algorithm, rank, lambda, metric) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub algorithm: String,
    pub rank: usize,
    pub lambda: f64,
    pub metric: Metric,
    pub per_run: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

impl EvalReport {
    pub fn new(
        dataset: impl Into<String>,
        algorithm: impl Into<String>,
        rank: usize,
        lambda: f64,
        metric: Metric,
        per_run: Vec<f64>,
    ) -> Result<Self> {
        let (mean, max) = run_stats(&per_run)?;
        Ok(EvalReport {
            dataset: dataset.into(),
            algorithm: algorithm.into(),
            rank,
            lambda,
            metric,
            per_run,
            mean,
            max,
        })
    }
}
