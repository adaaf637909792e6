use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EvalMode;
use crate::error::{NmfError, Result};
use crate::solvers::{Algorithm, SolverConfig};

pub const DEFAULT_RANKS: [usize; 8] = [2, 3, 5, 7, 9, 11, 15, 20];
pub const DEFAULT_LAMBDAS: [f64; 11] = [1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];

/// A full sweep: every dataset x algorithm x rank x lambda x run.
///
/// `solver` supplies the remaining solver settings; its algorithm, rank,
/// lambda and seed are overridden per cell. Run `i` uses seed
/// `base_seed + i` for initialization, k-means and the fold split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    /// Dataset manifest files. Relative paths resolve against the plan file.
    pub datasets: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub ranks: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub runs: usize,
    pub folds: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub solver: SolverConfig,
    /// Min-max normalize every feature before fitting.
    pub normalize: bool,
    /// Neighbours used by the kNN classifier.
    pub knn_k: usize,
    pub eval_mode: EvalMode,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            datasets: Vec::new(),
            algorithms: Algorithm::ALL.to_vec(),
            ranks: DEFAULT_RANKS.to_vec(),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            runs: 5,
            folds: 5,
            base_seed: 0,
            output_dir: PathBuf::from("results"),
            solver: SolverConfig::default(),
            normalize: true,
            knn_k: 3,
            eval_mode: EvalMode::Transductive,
            base_dir: None,
        }
    }
}

impl ExperimentPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut plan: ExperimentPlan =
            serde_json::from_str(&text).map_err(|e| NmfError::Schema(format!("{}: {e}", path.display())))?;
        plan.base_dir = path.parent().map(Path::to_path_buf);
        Ok(plan)
    }

    pub fn dataset_paths(&self) -> Vec<PathBuf> {
        self.datasets
            .iter()
            .map(|p| match &self.base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(NmfError::param("datasets", "plan lists no datasets"));
        }
        if self.algorithms.is_empty() {
            return Err(NmfError::param("algorithms", "plan lists no algorithms"));
        }
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return Err(NmfError::param("ranks", "need at least one rank, all >= 1"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(NmfError::param("lambdas", "need at least one lambda, all positive"));
        }
        if self.runs == 0 {
            return Err(NmfError::param("runs", "must be at least 1"));
        }
        if self.folds < 2 {
            return Err(NmfError::param("folds", "need at least 2 folds"));
        }
        if self.knn_k == 0 {
            return Err(NmfError::param("knn_k", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let plan: ExperimentPlan = serde_json::from_str(r#"{"datasets":["a.json"]}"#).unwrap();
        assert_eq!(plan.ranks, DEFAULT_RANKS.to_vec());
        assert_eq!(plan.lambdas.len(), 11);
        assert_eq!((plan.runs, plan.folds), (5, 5));
        assert_eq!(plan.algorithms.len(), 4);
        plan.validate().unwrap();
    }

    #[test]
    fn invalid_plans() {
        let mut plan = ExperimentPlan {
            datasets: vec!["a.json".into()],
            ..Default::default()
        };
        plan.runs = 0;
        assert!(plan.validate().is_err());
        plan.runs = 1;
        plan.lambdas = vec![0.0];
        assert!(plan.validate().is_err());
    }
}
