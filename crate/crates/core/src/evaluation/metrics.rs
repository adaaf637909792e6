use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LabelVector;
use crate::error::{NmfError, Result};

/// Denominator used to normalize mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmiNormalization {
    #[default]
    Arithmetic,
    Geometric,
    Max,
}

impl fmt::Display for NmiNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NmiNormalization::Arithmetic => "arithmetic",
            NmiNormalization::Geometric => "geometric",
            NmiNormalization::Max => "max",
        })
    }
}

impl FromStr for NmiNormalization {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arithmetic" => Ok(NmiNormalization::Arithmetic),
            "geometric" => Ok(NmiNormalization::Geometric),
            "max" => Ok(NmiNormalization::Max),
            other => Err(NmfError::param("nmi_normalization", format!("unknown variant `{other}`"))),
        }
    }
}

/// Normalized mutual information with arithmetic-mean normalization.
pub fn nmi(a: &LabelVector, b: &LabelVector) -> Result<f64> {
    nmi_with(a, b, NmiNormalization::Arithmetic)
}

/// Normalized mutual information between two labelings.
///
/// Exactly symmetric in its arguments and exactly 1 when the labelings agree
/// up to a renaming of the labels.
pub fn nmi_with(a: &LabelVector, b: &LabelVector, normalization: NmiNormalization) -> Result<f64> {
    if a.len() != b.len() {
        return Err(NmfError::dim("nmi", format!("label lengths {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(NmfError::Input("nmi of empty labelings".into()));
    }
    let n = a.len() as f64;

    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        *cells.entry((x, y)).or_default() += 1;
    }
    let count_a = marginal(a.as_slice());
    let count_b = marginal(b.as_slice());

    // Bijective contingency table: identical up to renaming.
    if cells.len() == count_a.len() && cells.len() == count_b.len() {
        return Ok(1.0);
    }

    let ln_n = n.ln();
    let mut terms: Vec<f64> = cells
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            // The marginal logs are added before subtracting: IEEE addition
            // commutes, so swapping the arguments gives the same bits.
            let marginals = (count_a[&x] as f64).ln() + (count_b[&y] as f64).ln();
            (c / n) * (ln_n + c.ln() - marginals)
        })
        .collect();
    let mi = sorted_sum(&mut terms).max(0.0);
    let ha = entropy(&count_a, n);
    let hb = entropy(&count_b, n);

    let denom = match normalization {
        NmiNormalization::Arithmetic => 0.5 * (ha + hb),
        NmiNormalization::Geometric => (ha * hb).sqrt(),
        NmiNormalization::Max => ha.max(hb),
    };
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).min(1.0))
}

fn marginal(labels: &[usize]) -> HashMap<usize, usize> {
    let mut counts = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts
}

fn entropy(counts: &HashMap<usize, usize>, n: f64) -> f64 {
    let mut terms: Vec<f64> = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    sorted_sum(&mut terms)
}

/// Order-independent summation, so argument order cannot change the result.
fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(|x, y| x.total_cmp(y));
    terms.iter().sum()
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(NmfError::dim(
            "accuracy",
            format!("label lengths {} and {}", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(NmfError::Input("accuracy of empty labelings".into()));
    }
    let hits = pred
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Arithmetic mean and maximum of per-run scores.
pub fn run_stats(per_run: &[f64]) -> Result<(f64, f64)> {
    if per_run.is_empty() {
        return Err(NmfError::Input("run_stats of an empty sequence".into()));
    }
    let max = per_run.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = per_run.iter().copied().fold(f64::INFINITY, f64::min);
    // Rounding may push the sum-based mean just outside [min, max].
    let mean = (per_run.iter().sum::<f64>() / per_run.len() as f64).clamp(min, max);
    Ok((mean, max))
}
