use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{NmfError, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::solvers::{diag_deviation, fit, FitTrace, SolverConfig};

/// Contents of `fit.json`, written next to the factor files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub dataset: String,
    pub features: usize,
    pub samples: usize,
    pub config: SolverConfig,
    pub converged: bool,
    pub iterations_run: usize,
    pub final_objective: Option<f64>,
    pub wall_time_secs: f64,
    /// Mean diagonal of `WᵀW` and the relative off-identity mass; absent
    /// for basis-free models.
    pub lambda_hat: Option<f64>,
    pub diag_deviation: Option<f64>,
    pub version: String,
}

/// Fits `config` to `dataset` and writes `W.csv` (if the model has a
/// basis), `H.csv`, `trace.csv` and `fit.json` into `out_dir`.
pub fn cmd_fit<T: Scalar>(dataset: &Dataset<T>, config: &SolverConfig, out_dir: &Path) -> Result<FitSummary> {
    let (pair, trace) = fit(&dataset.x, config)?;
    fs::create_dir_all(out_dir)?;
    let (mut lambda_hat, mut deviation) = (None, None);
    if let Some(w) = &pair.w {
        write_matrix_csv(w, &out_dir.join("W.csv"))?;
        let (l, d) = diag_deviation(w)?;
        lambda_hat = Some(l.as_f64());
        deviation = Some(d.as_f64());
    }
    write_matrix_csv(&pair.h, &out_dir.join("H.csv"))?;
    write_trace_csv(&trace, &out_dir.join("trace.csv"))?;
    let summary = FitSummary {
        dataset: dataset.name.clone(),
        features: dataset.num_features(),
        samples: dataset.num_samples(),
        config: config.clone(),
        converged: trace.converged,
        iterations_run: trace.iterations_run,
        final_objective: trace.final_objective(),
        wall_time_secs: trace.wall_time.as_secs_f64(),
        lambda_hat,
        diag_deviation: deviation,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut file = BufWriter::new(File::create(out_dir.join("fit.json"))?);
    serde_json::to_writer_pretty(&mut file, &summary)?;
    writeln!(file)?;
    file.flush()?;
    Ok(summary)
}

/// Headerless CSV, one matrix row per line, shortest round-trip formatting.
pub fn write_matrix_csv<T: Scalar>(a: &DenseMatrix<T>, path: &Path) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in a.rows() {
        out.write_record(row.iter().map(|v| v.as_f64().to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut values = Vec::new();
    let mut shape = (0, 0);
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        shape = (i + 1, rec.len());
        for (j, cell) in rec.iter().enumerate() {
            values.push(cell.trim().parse::<f64>().map_err(|_| NmfError::Csv {
                path: path.to_path_buf(),
                row: i + 1,
                column: j + 1,
                message: format!("non-numeric cell `{cell}`"),
            })?);
        }
    }
    Array2::from_shape_vec(shape, values)
        .map_err(|e| NmfError::Schema(format!("{}: {e}", path.display())))
}

/// `iteration,objective` with iteration 0 holding the initial objective.
pub fn write_trace_csv(trace: &FitTrace, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["iteration", "objective"])?;
    for (i, f) in trace.objective_history.iter().enumerate() {
        out.write_record([i.to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct TraceRow {
    iteration: usize,
    objective: f64,
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut reader = super::open_csv(path)?;
    let header = reader.headers()?.clone();
    if !(header.iter().any(|h| h == "iteration") && header.iter().any(|h| h == "objective")) {
        return Err(NmfError::Schema(format!(
            "{}: expected columns iteration,objective",
            path.display()
        )));
    }
    reader
        .deserialize::<TraceRow>()
        .map(|r| r.map(|r| (r.iteration, r.objective)).map_err(NmfError::from))
        .collect()
}
