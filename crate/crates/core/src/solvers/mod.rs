//! Multiplicative-update solvers: the structure-preserving factorization
//! (`dsp_nmf`) and the baselines it is compared against.

mod graph;
mod init;
mod normalize;
mod update;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use graph::{build_knn_graph, GraphSpec};
pub use init::{init_factors, INIT_LOW};
pub use normalize::{diag_deviation, normalize_factors};
pub use update::{update_gnmf, update_h_basic, update_h_dsp, update_symm, update_w};

use crate::error::{NmfError, Result};
use crate::linalg::{check_matrix, gram, is_nonnegative, residual_sq, DenseMatrix, DspObjective};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BasicNmf,
    Gnmf,
    SymmNmf,
    DspNmf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::BasicNmf, Algorithm::Gnmf, Algorithm::SymmNmf, Algorithm::DspNmf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::BasicNmf => "basic_nmf",
            Algorithm::Gnmf => "gnmf",
            Algorithm::SymmNmf => "symm_nmf",
            Algorithm::DspNmf => "dsp_nmf",
        }
    }

    /// Whether the DSP scale `lambda` influences the result.
    pub fn uses_lambda(self) -> bool {
        self == Algorithm::DspNmf
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "basic_nmf" | "nmf" | "basic" => Ok(Algorithm::BasicNmf),
            "gnmf" => Ok(Algorithm::Gnmf),
            "symm_nmf" | "symmnmf" | "symnmf" => Ok(Algorithm::SymmNmf),
            "dsp_nmf" | "dspnmf" | "dsp" => Ok(Algorithm::DspNmf),
            other => Err(NmfError::param("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Which printed form of the coefficient update to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DspRule {
    /// `2λ²` on the quartic denominator term, the KKT-consistent form.
    #[default]
    AppendixConsistent,
    /// `λ²` on the quartic denominator term.
    MainText,
}

impl fmt::Display for DspRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DspRule::AppendixConsistent => "appendix_consistent",
            DspRule::MainText => "main_text",
        })
    }
}

impl FromStr for DspRule {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "appendix_consistent" | "appendix" => Ok(DspRule::AppendixConsistent),
            "main_text" | "main" => Ok(DspRule::MainText),
            other => Err(NmfError::param("dsp_rule", format!("unknown rule `{other}`"))),
        }
    }
}

/// Similarity matrix factored by `symm_nmf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    /// Dot products of samples, `XᵀX`.
    #[default]
    Gram,
    /// Binary kNN adjacency with `graph_k` neighbours.
    KnnGraph,
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Similarity::Gram => "gram",
            Similarity::KnnGraph => "knn_graph",
        })
    }
}

impl FromStr for Similarity {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gram" => Ok(Similarity::Gram),
            "knn_graph" | "knn" => Ok(Similarity::KnnGraph),
            other => Err(NmfError::param("similarity", format!("unknown similarity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub rank: usize,
    /// DSP scale between `XᵀX` and `HᵀH`.
    pub lambda: f64,
    /// GNMF graph penalty weight.
    pub gnmf_lambda: f64,
    /// Neighbour count of the GNMF graph (and of the kNN similarity).
    pub graph_k: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub dsp_rule: DspRule,
    pub similarity: Similarity,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::DspNmf,
            rank: 2,
            lambda: 1e3,
            gnmf_lambda: 100.0,
            graph_k: 5,
            max_iter: 200,
            rel_tol: 1e-5,
            seed: 0,
            dsp_rule: DspRule::AppendixConsistent,
            similarity: Similarity::Gram,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, rank: usize) -> Self {
        SolverConfig {
            algorithm,
            rank,
            ..Default::default()
        }
    }

    /// Checks the parameter invariants and the rank against an `m x n` input.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.rank == 0 || self.rank >= m.min(n) {
            return Err(NmfError::Rank {
                rank: self.rank,
                rows: m,
                cols: n,
            });
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(NmfError::param("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(self.gnmf_lambda >= 0.0) || !self.gnmf_lambda.is_finite() {
            return Err(NmfError::param(
                "gnmf_lambda",
                format!("must be nonnegative, got {}", self.gnmf_lambda),
            ));
        }
        if self.max_iter == 0 {
            return Err(NmfError::param("max_iter", "must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(NmfError::param("rel_tol", format!("must be positive, got {}", self.rel_tol)));
        }
        let needs_graph = self.algorithm == Algorithm::Gnmf
            || (self.algorithm == Algorithm::SymmNmf && self.similarity == Similarity::KnnGraph);
        if needs_graph && (self.graph_k == 0 || self.graph_k >= n) {
            return Err(NmfError::param(
                "graph_k",
                format!("need 1 <= k < n = {n}, got {}", self.graph_k),
            ));
        }
        Ok(())
    }
}

/// Basis `W` (`m x r`) and coefficients `H` (`r x n`). Symmetric
/// factorization has no basis and leaves `w` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair<T> {
    pub w: Option<DenseMatrix<T>>,
    pub h: DenseMatrix<T>,
}

impl<T: Scalar> FactorPair<T> {
    pub fn rank(&self) -> usize {
        self.h.nrows()
    }

    pub fn reconstruction(&self) -> Option<DenseMatrix<T>> {
        self.w.as_ref().map(|w| w.dot(&self.h))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    /// Objective at the starting point followed by one value per iteration,
    /// all taken before the final normalization.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    pub iterations_run: usize,
    pub wall_time: Duration,
}

impl FitTrace {
    /// Relative change `|f_t − f_{t−1}| / (1 + f_{t−1})` for each iteration.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.objective_history
            .windows(2)
            .map(|p| relative_change(p[0], p[1]))
            .collect()
    }

    /// First iteration (1-based) whose relative change is below `tol`.
    pub fn first_iteration_below(&self, tol: f64) -> Option<usize> {
        self.relative_changes().iter().position(|&c| c < tol).map(|i| i + 1)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_history.last().copied()
    }

    pub fn per_iteration_time(&self) -> Duration {
        if self.iterations_run == 0 {
            Duration::ZERO
        } else {
            self.wall_time / self.iterations_run as u32
        }
    }
}

#[inline]
pub fn relative_change(prev: f64, next: f64) -> f64 {
    (next - prev).abs() / (1.0 + prev.abs())
}

enum Model<T> {
    Basic,
    Dsp { objective: DspObjective<T>, lambda: T, rule: DspRule },
    Gnmf { graph: GraphSpec<T>, weight: T },
    Symm { similarity: DenseMatrix<T> },
}

impl<T: Scalar> Model<T> {
    fn build(x: &DenseMatrix<T>, config: &SolverConfig) -> Result<Self> {
        Ok(match config.algorithm {
            Algorithm::BasicNmf => Model::Basic,
            Algorithm::DspNmf => {
                let lambda = T::lit(config.lambda);
                Model::Dsp {
                    objective: DspObjective::new(x, lambda)?,
                    lambda,
                    rule: config.dsp_rule,
                }
            }
            Algorithm::Gnmf => Model::Gnmf {
                graph: build_knn_graph(x, config.graph_k)?,
                weight: T::lit(config.gnmf_lambda),
            },
            Algorithm::SymmNmf => Model::Symm {
                similarity: match config.similarity {
                    Similarity::Gram => gram(x),
                    Similarity::KnnGraph => build_knn_graph(x, config.graph_k)?.adjacency,
                },
            },
        })
    }

    fn objective(&self, x: &DenseMatrix<T>, pair: &FactorPair<T>) -> T {
        match (self, pair.w.as_ref()) {
            (Model::Basic, Some(w)) => residual_sq(x, w, &pair.h),
            (Model::Dsp { objective, .. }, Some(w)) => objective.eval(x, w, &pair.h),
            (Model::Gnmf { graph, weight }, Some(w)) => residual_sq(x, w, &pair.h) + *weight * graph.smoothness(&pair.h),
            (Model::Symm { similarity }, _) => {
                let hth = gram(&pair.h);
                ndarray::Zip::from(similarity)
                    .and(&hth)
                    .fold(T::zero(), |acc, &a, &b| acc + (a - b) * (a - b))
            }
            _ => unreachable!("basis-based model without a basis"),
        }
    }

    fn step(&self, x: &DenseMatrix<T>, pair: FactorPair<T>) -> Result<FactorPair<T>> {
        let FactorPair { w, h } = pair;
        Ok(match (self, w) {
            (Model::Basic, Some(w)) => {
                let h = update_h_basic(x, &w, &h)?;
                let w = update_w(x, &w, &h)?;
                FactorPair { w: Some(w), h }
            }
            (Model::Dsp { lambda, rule, .. }, Some(w)) => {
                let h = update_h_dsp(x, &w, &h, *lambda, *rule)?;
                let w = update_w(x, &w, &h)?;
                FactorPair { w: Some(w), h }
            }
            (Model::Gnmf { graph, weight }, Some(w)) => {
                let (w, h) = update_gnmf(x, &w, &h, graph, *weight)?;
                FactorPair { w: Some(w), h }
            }
            (Model::Symm { similarity }, _) => FactorPair {
                w: None,
                h: update_symm(similarity, &h)?,
            },
            _ => unreachable!("basis-based model without a basis"),
        })
    }
}

/// Runs the configured algorithm on `x` (features x samples, nonnegative).
///
/// Iterates until the relative objective change drops below `rel_tol` or
/// `max_iter` iterations have run, then normalizes `W` to unit columns.
pub fn fit<T: Scalar>(x: &DenseMatrix<T>, config: &SolverConfig) -> Result<(FactorPair<T>, FitTrace)> {
    let start = Instant::now();
    check_matrix(x, "X")?;
    if !is_nonnegative(x) {
        return Err(NmfError::Input(
            "X has negative entries; min-max normalize the data first".into(),
        ));
    }
    let (m, n) = x.dim();
    config.validate(m, n)?;

    let model = Model::build(x, config)?;
    let mut pair = init_factors::<T>(m, n, config.rank, config.seed)?;
    if config.algorithm == Algorithm::SymmNmf {
        pair.w = None;
    }

    let mut trace = FitTrace::default();
    let mut prev = model.objective(x, &pair).as_f64();
    trace.objective_history.push(prev);

    for iteration in 1..=config.max_iter {
        pair = model.step(x, pair)?;
        let value = model.objective(x, &pair).as_f64();
        if !value.is_finite() {
            return Err(NmfError::Diverged { iteration });
        }
        trace.objective_history.push(value);
        trace.iterations_run = iteration;
        if relative_change(prev, value) < config.rel_tol {
            trace.converged = true;
            break;
        }
        prev = value;
    }

    let pair = normalize_factors(&pair)?;
    trace.wall_time = start.elapsed();
    log::debug!(
        "{} r={} finished after {} iterations (converged: {})",
        config.algorithm,
        config.rank,
        trace.iterations_run,
        trace.converged
    );
    Ok((pair, trace))
}

/// Coefficients of new samples `x` (features x samples) for a fixed basis
/// `w`, by Lee-Seung `H` updates alone from a seeded positive start.
pub fn project_onto_basis<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    max_iter: usize,
    rel_tol: f64,
    seed: u64,
) -> Result<DenseMatrix<T>> {
    check_matrix(x, "X")?;
    if !is_nonnegative(x) {
        return Err(NmfError::Input("X has negative entries".into()));
    }
    if w.nrows() != x.nrows() {
        return Err(NmfError::dim(
            "project_onto_basis",
            format!("W has {} rows, X has {}", w.nrows(), x.nrows()),
        ));
    }
    let r = w.ncols();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut h = DenseMatrix::<T>::from_shape_fn((r, x.ncols()), |_| {
        T::lit(1.0 - (1.0 - INIT_LOW) * rand::Rng::random::<f64>(&mut rng))
    });
    let mut prev = residual_sq(x, w, &h).as_f64();
    for _ in 0..max_iter {
        h = update_h_basic(x, w, &h)?;
        let value = residual_sq(x, w, &h).as_f64();
        if relative_change(prev, value) < rel_tol {
            break;
        }
        prev = value;
    }
    Ok(h)
}
