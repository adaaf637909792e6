//! Experiment harness: single fits, parameter sweeps, plot series and
//! first-place tallies. The command-line tool is a thin wrapper over this.

mod fit_cmd;
mod plan;
mod plotdata;
mod rankfirst;
mod sweep;

pub use fit_cmd::{cmd_fit, read_matrix_csv, read_trace_csv, write_matrix_csv, write_trace_csv, FitSummary};
pub use plan::{ExperimentPlan, DEFAULT_LAMBDAS, DEFAULT_RANKS};
pub use plotdata::{cmd_plotdata, plot_series, PlotKind, PlotOptions, PlotPoint};
pub use rankfirst::{cmd_rankfirst, rank_first, RankFirstTable};
pub use sweep::{cmd_sweep, run_sweep, summarize, ResultRow, SummaryRow, SweepReport};

use std::fmt;
use std::str::FromStr;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::error::{NmfError, Result};
use crate::evaluation::{accuracy, kmeans, knn_classify, nmi, stratified_folds, LabelVector, Metric};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::solvers::{fit, project_onto_basis, SolverConfig};

/// Opens a headed CSV file, naming the path in the error.
pub(crate) fn open_csv(path: &std::path::Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| NmfError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Process exit status of a harness command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some sweep cells failed; their errors are in the results file.
    Partial,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 2,
        }
    }
}

/// How the classifier sees the reduced data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Factorize all samples once and cross-validate on the columns of `H`.
    #[default]
    Transductive,
    /// Per fold, factorize the training samples only and project the test
    /// samples onto the learned basis.
    FixedBasis,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Transductive => "transductive",
            EvalMode::FixedBasis => "fixed_basis",
        })
    }
}

impl FromStr for EvalMode {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "transductive" => Ok(EvalMode::Transductive),
            "fixed_basis" => Ok(EvalMode::FixedBasis),
            other => Err(NmfError::param("eval_mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Settings shared by every evaluation of a reduced representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub folds: usize,
    pub knn_k: usize,
    pub kmeans_restarts: usize,
    pub mode: EvalMode,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            folds: 5,
            knn_k: 3,
            kmeans_restarts: 10,
            mode: EvalMode::Transductive,
        }
    }
}

/// K-means NMI of the columns of `h` against `labels`, with one cluster
/// per class.
pub fn clustering_score<T: Scalar>(h: &DenseMatrix<T>, labels: &LabelVector, seed: u64, restarts: usize) -> Result<f64> {
    let found = kmeans(h, labels.num_classes(), seed, restarts)?;
    nmi(&found, labels)
}

/// Mean kNN accuracy over stratified folds.
///
/// In `Transductive` mode `h` holds the reduced samples. In `FixedBasis`
/// mode each fold refits `config` on the training columns of `x` and
/// projects the held-out columns; `h` is ignored.
pub fn classification_score<T: Scalar>(
    x: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
    labels: &LabelVector,
    config: &SolverConfig,
    settings: &EvalSettings,
) -> Result<f64> {
    let assignment = stratified_folds(labels, settings.folds, config.seed)?;
    let mut total = 0.0;
    for fold in 0..settings.folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == fold);
        let (train, test) = match settings.mode {
            EvalMode::Transductive => (h.select(Axis(1), &train_idx), h.select(Axis(1), &test_idx)),
            EvalMode::FixedBasis => {
                let x_train = x.select(Axis(1), &train_idx);
                let (pair, _) = fit(&x_train, config)?;
                let w = pair.w.ok_or_else(|| {
                    NmfError::param("eval_mode", format!("{} has no basis to project onto", config.algorithm))
                })?;
                let x_test = x.select(Axis(1), &test_idx);
                let h_test = project_onto_basis(&x_test, &w, config.max_iter, config.rel_tol, config.seed)?;
                (pair.h, h_test)
            }
        };
        let pred = knn_classify(&train, &labels.select(&train_idx), &test, settings.knn_k)?;
        total += accuracy(&pred, &labels.select(&test_idx))?;
    }
    Ok(total / settings.folds as f64)
}

/// Fits `config` on `x` and scores the result on every metric. Each metric
/// fails independently, with the error rendered as text; a failed fit fails
/// all of them.
pub fn fit_and_score<T: Scalar>(
    x: &DenseMatrix<T>,
    labels: &LabelVector,
    config: &SolverConfig,
    settings: &EvalSettings,
) -> Vec<(Metric, std::result::Result<f64, String>)> {
    let h = match fit(x, config) {
        Ok((pair, _)) => pair.h,
        Err(e) => return Metric::ALL.iter().map(|&m| (m, Err(e.to_string()))).collect(),
    };
    Metric::ALL
        .iter()
        .map(|&metric| {
            let score = match metric {
                Metric::Nmi => clustering_score(&h, labels, config.seed, settings.kmeans_restarts),
                Metric::Accuracy => classification_score(x, &h, labels, config, settings),
            };
            (metric, score.map_err(|e| e.to_string()))
        })
        .collect()
}
