use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_and_score, EvalSettings, ExperimentPlan, Outcome};
use crate::data::{Dataset, DatasetManifest};
use crate::error::{NmfError, Result};
use crate::evaluation::{run_stats, LabelVector, Metric};
use crate::solvers::{Algorithm, SolverConfig};

/// One line of the long-format results file. Exactly one of `value` and
/// `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub rank: usize,
    pub lambda: f64,
    pub run: usize,
    pub metric: Metric,
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// Mean and max over the successful runs of one cell; empty when every run
/// failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub rank: usize,
    pub lambda: f64,
    pub metric: Metric,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedRank {
    pub dataset: String,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub results: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub skipped: Vec<SkippedRank>,
    pub failures: usize,
    pub wall_time_secs: f64,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    plan: &'a ExperimentPlan,
    version: &'static str,
    jobs: usize,
    wall_time_secs: f64,
    result_rows: usize,
    summary_rows: usize,
    failures: usize,
    skipped_ranks: &'a [SkippedRank],
}

struct Job {
    dataset: usize,
    algorithm: Algorithm,
    rank: usize,
    /// Index into the lambda grid; `None` for algorithms that ignore lambda.
    lambda: Option<usize>,
    run: usize,
}

/// Runs every cell of `plan` on a pool of `jobs` threads.
///
/// Algorithms that ignore lambda are fitted once per (rank, run) and their
/// scores repeated across the lambda grid. Cell failures become error rows;
/// only dataset loading errors abort the sweep.
pub fn run_sweep(plan: &ExperimentPlan, jobs: usize) -> Result<SweepReport> {
    plan.validate()?;
    let start = Instant::now();
    let mut datasets: Vec<(Dataset<f64>, LabelVector)> = Vec::new();
    for path in plan.dataset_paths() {
        let d: Dataset<f64> = DatasetManifest::load(&path)?.load_dataset()?;
        let d = if plan.normalize { d.normalized() } else { d };
        let labels = d.require_labels()?.clone();
        datasets.push((d, labels));
    }

    let mut skipped = Vec::new();
    let mut valid_ranks: Vec<Vec<usize>> = Vec::new();
    for (d, _) in &datasets {
        let limit = d.num_features().min(d.num_samples());
        let (ok, bad): (Vec<usize>, Vec<usize>) = plan.ranks.iter().partition(|&&r| r < limit);
        for rank in bad {
            log::warn!("{}: skipping rank {rank}, needs rank < {limit}", d.name);
            skipped.push(SkippedRank {
                dataset: d.name.clone(),
                rank,
            });
        }
        valid_ranks.push(ok);
    }

    let mut job_list = Vec::new();
    for (di, ranks) in valid_ranks.iter().enumerate() {
        for &algorithm in &plan.algorithms {
            for &rank in ranks {
                let grid: Vec<Option<usize>> = if algorithm.uses_lambda() {
                    (0..plan.lambdas.len()).map(Some).collect()
                } else {
                    vec![None]
                };
                for lambda in grid {
                    for run in 0..plan.runs {
                        job_list.push(Job {
                            dataset: di,
                            algorithm,
                            rank,
                            lambda,
                            run,
                        });
                    }
                }
            }
        }
    }

    let settings = EvalSettings {
        folds: plan.folds,
        knn_k: plan.knn_k,
        mode: plan.eval_mode,
        ..Default::default()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| NmfError::Input(format!("cannot start worker pool: {e}")))?;
    let scores: Vec<Vec<(Metric, std::result::Result<f64, String>)>> = pool.install(|| {
        job_list
            .par_iter()
            .map(|job| {
                let (d, labels) = &datasets[job.dataset];
                let config = SolverConfig {
                    algorithm: job.algorithm,
                    rank: job.rank,
                    lambda: job.lambda.map_or(plan.solver.lambda, |i| plan.lambdas[i]),
                    seed: plan.base_seed + job.run as u64,
                    ..plan.solver.clone()
                };
                let out = fit_and_score(&d.x, labels, &config, &settings);
                log::debug!("{} {} r={} run={} done", d.name, job.algorithm, job.rank, job.run);
                out
            })
            .collect()
    });

    let index: HashMap<(usize, Algorithm, usize, Option<usize>, usize), usize> = job_list
        .iter()
        .enumerate()
        .map(|(i, j)| ((j.dataset, j.algorithm, j.rank, j.lambda, j.run), i))
        .collect();
    let mut results = Vec::new();
    for (di, ranks) in valid_ranks.iter().enumerate() {
        let name = &datasets[di].0.name;
        for &algorithm in &plan.algorithms {
            for &rank in ranks {
                for (li, &lambda) in plan.lambdas.iter().enumerate() {
                    let key_lambda = algorithm.uses_lambda().then_some(li);
                    for run in 0..plan.runs {
                        let cell = &scores[index[&(di, algorithm, rank, key_lambda, run)]];
                        for (metric, score) in cell {
                            let (value, error) = match score {
                                Ok(v) => (Some(*v), None),
                                Err(e) => (None, Some(e.clone())),
                            };
                            results.push(ResultRow {
                                dataset: name.clone(),
                                algorithm,
                                rank,
                                lambda,
                                run,
                                metric: *metric,
                                value,
                                error,
                            });
                        }
                    }
                }
            }
        }
    }
    let failures = results.iter().filter(|r| r.error.is_some()).count();
    let summary = summarize(&results);
    Ok(SweepReport {
        results,
        summary,
        skipped,
        failures,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Groups result rows by (dataset, algorithm, rank, lambda, metric), in
/// order of first appearance.
pub fn summarize(results: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<SummaryRow> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut slot: HashMap<(String, Algorithm, usize, u64, Metric), usize> = HashMap::new();
    for row in results {
        let key = (row.dataset.clone(), row.algorithm, row.rank, row.lambda.to_bits(), row.metric);
        let i = *slot.entry(key).or_insert_with(|| {
            order.push(SummaryRow {
                dataset: row.dataset.clone(),
                algorithm: row.algorithm,
                rank: row.rank,
                lambda: row.lambda,
                metric: row.metric,
                mean: None,
                max: None,
                runs: 0,
            });
            values.push(Vec::new());
            order.len() - 1
        });
        if let Some(v) = row.value {
            values[i].push(v);
        }
    }
    for (row, vals) in order.iter_mut().zip(&values) {
        row.runs = vals.len();
        if let Ok((mean, max)) = run_stats(vals) {
            row.mean = Some(mean);
            row.max = Some(max);
        }
    }
    order
}

/// Runs the sweep and writes `results.csv`, `summary.csv` and
/// `run_metadata.json` into the plan's output directory.
pub fn cmd_sweep(plan: &ExperimentPlan, jobs: usize) -> Result<(SweepReport, Outcome)> {
    let report = run_sweep(plan, jobs)?;
    let dir = &plan.output_dir;
    fs::create_dir_all(dir)?;
    write_rows(&dir.join("results.csv"), &report.results)?;
    write_rows(&dir.join("summary.csv"), &report.summary)?;
    let meta = RunMetadata {
        plan,
        version: env!("CARGO_PKG_VERSION"),
        jobs,
        wall_time_secs: report.wall_time_secs,
        result_rows: report.results.len(),
        summary_rows: report.summary.len(),
        failures: report.failures,
        skipped_ranks: &report.skipped,
    };
    let mut file = BufWriter::new(File::create(dir.join("run_metadata.json"))?);
    serde_json::to_writer_pretty(&mut file, &meta)?;
    writeln!(file)?;
    file.flush()?;
    let outcome = if report.failures > 0 {
        log::warn!("{} result rows carry errors", report.failures);
        Outcome::Partial
    } else {
        Outcome::Success
    };
    Ok((report, outcome))
}

fn write_rows<R: Serialize>(path: &std::path::Path, rows: &[R]) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: Algorithm, run: usize, value: Option<f64>) -> ResultRow {
        ResultRow {
            dataset: "d".into(),
            algorithm: alg,
            rank: 2,
            lambda: 1.0,
            run,
            metric: Metric::Nmi,
            value,
            error: value.is_none().then(|| "boom".to_string()),
        }
    }

    #[test]
    fn summary_skips_failed_runs() {
        let rows = vec![
            row(Algorithm::DspNmf, 0, Some(0.5)),
            row(Algorithm::DspNmf, 1, None),
            row(Algorithm::DspNmf, 2, Some(0.7)),
            row(Algorithm::BasicNmf, 0, None),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].runs, 2);
        assert!((s[0].mean.unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(s[0].max, Some(0.7));
        assert_eq!((s[1].mean, s[1].runs), (None, 0));
    }
}
