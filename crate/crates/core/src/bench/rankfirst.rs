use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{NmfError, Result};

/// Scores closer than this count as a tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
struct Row {
    dataset: String,
    algorithm: String,
    metric: String,
    #[serde(default)]
    lambda: Option<f64>,
    mean: Option<f64>,
    max: Option<f64>,
}

/// Collected `mean` and `max` values of one (dataset, metric, algorithm).
type Stats = [Vec<f64>; 2];

/// How often each algorithm ranks first across datasets, per metric and
/// statistic, plus the cross-dataset averages of each statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct RankFirstTable {
    /// In order of first appearance in the input.
    pub algorithms: Vec<String>,
    /// Sorted metric names.
    pub metrics: Vec<String>,
    /// `counts[a][s][m]`: datasets on which algorithm `a` is first for
    /// statistic `s` (0 = mean, 1 = max) and metric `m`.
    pub counts: Vec<[Vec<usize>; 2]>,
    /// Same layout: mean over datasets of the per-dataset statistic.
    pub averages: Vec<[Vec<Option<f64>>; 2]>,
}

impl RankFirstTable {
    pub fn count(&self, algorithm: &str, use_max: bool, metric: &str) -> Option<usize> {
        let a = self.algorithms.iter().position(|x| x == algorithm)?;
        let m = self.metrics.iter().position(|x| x == metric)?;
        Some(self.counts[a][usize::from(use_max)][m])
    }

    pub fn average(&self, algorithm: &str, use_max: bool, metric: &str) -> Option<f64> {
        let a = self.algorithms.iter().position(|x| x == algorithm)?;
        let m = self.metrics.iter().position(|x| x == metric)?;
        self.averages[a][usize::from(use_max)][m]
    }

    fn header(&self, prefix: [&str; 2]) -> Vec<String> {
        let mut h = vec!["algorithm".to_string()];
        for p in prefix {
            h.extend(self.metrics.iter().map(|m| format!("{p}_{m}")));
        }
        h
    }

    /// `algorithm,mean_<metric>...,max_<metric>...` first-place counts.
    pub fn write_counts(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header(["mean", "max"]))?;
        for (a, name) in self.algorithms.iter().enumerate() {
            let mut rec = vec![name.clone()];
            for s in 0..2 {
                rec.extend(self.counts[a][s].iter().map(usize::to_string));
            }
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `algorithm,avgm_<metric>...,avgx_<metric>...` cross-dataset averages.
    pub fn write_averages(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header(["avgm", "avgx"]))?;
        for (a, name) in self.algorithms.iter().enumerate() {
            let mut rec = vec![name.clone()];
            for s in 0..2 {
                rec.extend(self.averages[a][s].iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()));
            }
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tallies first places from a summary CSV.
///
/// Rows of one (dataset, algorithm, metric) are first averaged, which pools
/// ranks (and lambdas unless `lambda` selects one). Every algorithm within
/// a tie of the best score on a dataset is credited with a first.
pub fn rank_first(summary_csv: &Path, lambda: Option<f64>) -> Result<RankFirstTable> {
    let mut reader = super::open_csv(summary_csv)?;
    let header = reader.headers()?.clone();
    for c in ["dataset", "algorithm", "metric", "mean", "max"] {
        if !header.iter().any(|h| h == c) {
            return Err(NmfError::Schema(format!("{}: missing column `{c}`", summary_csv.display())));
        }
    }
    let mut algorithms: Vec<String> = Vec::new();
    // (dataset, metric) -> algorithm index -> [means, maxes]
    let mut cells: BTreeMap<(String, String), BTreeMap<usize, Stats>> = BTreeMap::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        if let (Some(want), Some(have)) = (lambda, row.lambda) {
            if want != have {
                continue;
            }
        }
        let a = match algorithms.iter().position(|x| *x == row.algorithm) {
            Some(a) => a,
            None => {
                algorithms.push(row.algorithm.clone());
                algorithms.len() - 1
            }
        };
        let slot = cells.entry((row.dataset, row.metric)).or_default().entry(a).or_default();
        if let Some(v) = row.mean {
            slot[0].push(v);
        }
        if let Some(v) = row.max {
            slot[1].push(v);
        }
    }
    if cells.is_empty() {
        return Err(NmfError::Input(format!("{}: no usable rows", summary_csv.display())));
    }
    let mut metrics: Vec<String> = cells.keys().map(|(_, m)| m.clone()).collect();
    metrics.sort();
    metrics.dedup();

    let na = algorithms.len();
    let nm = metrics.len();
    let mut counts = vec![[vec![0usize; nm], vec![0usize; nm]]; na];
    let mut sums = vec![[vec![(0.0f64, 0usize); nm], vec![(0.0f64, 0usize); nm]]; na];
    for ((_, metric), per_alg) in &cells {
        let m = metrics.iter().position(|x| x == metric).unwrap();
        for s in 0..2 {
            let scores: Vec<(usize, f64)> = per_alg
                .iter()
                .filter(|(_, v)| !v[s].is_empty())
                .map(|(&a, v)| (a, v[s].iter().sum::<f64>() / v[s].len() as f64))
                .collect();
            let Some(best) = scores.iter().map(|&(_, v)| v).reduce(f64::max) else {
                continue;
            };
            for &(a, v) in &scores {
                if v >= best - TIE_TOL {
                    counts[a][s][m] += 1;
                }
                sums[a][s][m].0 += v;
                sums[a][s][m].1 += 1;
            }
        }
    }
    let averages = sums
        .iter()
        .map(|per_stat| per_stat.clone().map(|v| v.iter().map(|&(t, c)| (c > 0).then(|| t / c as f64)).collect()))
        .collect();
    Ok(RankFirstTable {
        algorithms,
        metrics,
        counts,
        averages,
    })
}

/// Tallies `summary_csv` and writes the count table to `out`.
pub fn cmd_rankfirst(summary_csv: &Path, lambda: Option<f64>, out: impl Write) -> Result<RankFirstTable> {
    let table = rank_first(summary_csv, lambda)?;
    table.write_counts(out)?;
    Ok(table)
}
