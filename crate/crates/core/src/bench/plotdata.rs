use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{read_trace_csv, summarize, ResultRow, SummaryRow};
use crate::error::{NmfError, Result};
use crate::evaluation::Metric;
use crate::solvers::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Objective per iteration, from a `trace.csv`.
    Convergence,
    /// Score against rank, one series per algorithm.
    PerformanceVsRank,
    /// Score against lambda, one series per dataset plus their average.
    LambdaTrend,
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlotKind::Convergence => "convergence",
            PlotKind::PerformanceVsRank => "performance_vs_rank",
            PlotKind::LambdaTrend => "lambda_trend",
        })
    }
}

impl FromStr for PlotKind {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "convergence" => Ok(PlotKind::Convergence),
            "performance_vs_rank" | "rank" => Ok(PlotKind::PerformanceVsRank),
            "lambda_trend" | "lambda" => Ok(PlotKind::LambdaTrend),
            other => Err(NmfError::param("kind", format!("unknown plot kind `{other}`"))),
        }
    }
}

/// Filters applied to sweep output before building series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub metric: Metric,
    /// Plot the `max` column instead of `mean`.
    pub use_max: bool,
    pub dataset: Option<String>,
    /// Lambda-trend algorithm; defaults to the DSP model.
    pub algorithm: Option<Algorithm>,
    /// Fix lambda for the rank plot. Without it each point takes its best
    /// lambda.
    pub lambda: Option<f64>,
    /// Fix the rank for the lambda plot. Without it scores are averaged
    /// over ranks.
    pub rank: Option<usize>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            metric: Metric::Nmi,
            use_max: false,
            dataset: None,
            algorithm: None,
            lambda: None,
            rank: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// Reads a results or summary CSV, telling them apart by their columns.
fn load_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = super::open_csv(path)?;
    let header = reader.headers()?.clone();
    let has = |c: &str| header.iter().any(|h| h == c);
    let base = ["dataset", "algorithm", "rank", "lambda", "metric"];
    if !base.iter().all(|c| has(c)) {
        return Err(NmfError::Schema(format!(
            "{}: expected columns {}",
            path.display(),
            base.join(",")
        )));
    }
    if has("value") {
        let rows: Vec<ResultRow> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(summarize(&rows))
    } else if has("mean") && has("max") {
        Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
    } else {
        Err(NmfError::Schema(format!(
            "{}: need a `value` column (results) or `mean` and `max` columns (summary)",
            path.display()
        )))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Builds the series for `kind` from the file at `input`.
pub fn plot_series(input: &Path, kind: PlotKind, opts: &PlotOptions) -> Result<Vec<PlotPoint>> {
    if kind == PlotKind::Convergence {
        return Ok(read_trace_csv(input)?
            .into_iter()
            .map(|(i, f)| PlotPoint {
                x: i as f64,
                y: f,
                series: "objective".into(),
            })
            .collect());
    }
    let rows: Vec<SummaryRow> = load_summary(input)?
        .into_iter()
        .filter(|r| r.metric == opts.metric)
        .filter(|r| opts.dataset.as_ref().is_none_or(|d| &r.dataset == d))
        .collect();
    let stat = |r: &SummaryRow| if opts.use_max { r.max } else { r.mean };
    let mut points = Vec::new();
    match kind {
        PlotKind::PerformanceVsRank => {
            // (algorithm, rank) -> dataset -> best score over the admitted lambdas
            let mut best: BTreeMap<(Algorithm, usize), BTreeMap<&str, f64>> = BTreeMap::new();
            for r in &rows {
                if opts.lambda.is_some_and(|l| r.lambda != l) {
                    continue;
                }
                let Some(y) = stat(r) else { continue };
                let slot = best.entry((r.algorithm, r.rank)).or_default().entry(&r.dataset).or_insert(y);
                *slot = slot.max(y);
            }
            for ((alg, rank), per_dataset) in best {
                let ys: Vec<f64> = per_dataset.values().copied().collect();
                points.push(PlotPoint {
                    x: rank as f64,
                    y: mean(&ys),
                    series: alg.to_string(),
                });
            }
        }
        PlotKind::LambdaTrend => {
            let alg = opts.algorithm.unwrap_or(Algorithm::DspNmf);
            let mut per: BTreeMap<&str, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
            for r in rows.iter().filter(|r| r.algorithm == alg) {
                if opts.rank.is_some_and(|k| r.rank != k) {
                    continue;
                }
                // Positive floats order like their bit patterns.
                if let Some(y) = stat(r) {
                    per.entry(&r.dataset).or_default().entry(r.lambda.to_bits()).or_default().push(y);
                }
            }
            let mut pooled: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            for (dataset, grid) in &per {
                for (&bits, ys) in grid {
                    let y = mean(ys);
                    pooled.entry(bits).or_default().push(y);
                    points.push(PlotPoint {
                        x: f64::from_bits(bits),
                        y,
                        series: dataset.to_string(),
                    });
                }
            }
            for (bits, ys) in pooled {
                points.push(PlotPoint {
                    x: f64::from_bits(bits),
                    y: mean(&ys),
                    series: "average".into(),
                });
            }
        }
        PlotKind::Convergence => unreachable!(),
    }
    if points.is_empty() {
        return Err(NmfError::Input(format!("no rows of {} match the requested filters", input.display())));
    }
    Ok(points)
}

/// Writes the series as `x,y,series` CSV.
pub fn cmd_plotdata(input: &Path, kind: PlotKind, opts: &PlotOptions, out: impl Write) -> Result<Vec<PlotPoint>> {
    let points = plot_series(input, kind, opts)?;
    let mut writer = csv::Writer::from_writer(out);
    for p in &points {
        writer.serialize(p)?;
    }
    writer.flush()?;
    Ok(points)
}
