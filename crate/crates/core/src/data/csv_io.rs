use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{NmfError, Result};
use crate::evaluation::LabelVector;
use crate::scalar::Scalar;

/// Layout of the table on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// One sample per line, one feature per column.
    #[default]
    SamplesAsRows,
    /// One feature per line, one sample per column.
    SamplesAsCols,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::SamplesAsRows => "samples_as_rows",
            Orientation::SamplesAsCols => "samples_as_cols",
        })
    }
}

impl FromStr for Orientation {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "samples_as_rows" | "rows" => Ok(Orientation::SamplesAsRows),
            "samples_as_cols" | "cols" | "columns" => Ok(Orientation::SamplesAsCols),
            other => Err(NmfError::param("orientation", format!("unknown orientation `{other}`"))),
        }
    }
}

/// Where the labels live.
///
/// With `SamplesAsRows` this selects a column, by header name or 0-based
/// index. With `SamplesAsCols` labels form a line of the table and must be
/// selected by 0-based line index (header excluded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.trim().to_string()),
        })
    }
}

fn csv_err(path: &Path, row: usize, column: usize, message: impl Into<String>) -> NmfError {
    NmfError::Csv {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

/// Reads a comma-separated numeric table into a features x samples dataset.
///
/// A header line is recognised when labels are selected by name or when any
/// non-label cell of the first line is not a number. Label values are mapped
/// to class ids in first-occurrence order. Diagnostics use 1-based line and
/// column numbers.
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    orientation: Orientation,
    label_column: Option<&LabelColumn>,
) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(csv_err(path, 1, 1, "file holds no data"));
    }

    if orientation == Orientation::SamplesAsCols {
        if let Some(LabelColumn::Name(name)) = label_column {
            return Err(NmfError::param(
                "label_column",
                format!("`{name}`: with samples_as_cols the label line must be given by index"),
            ));
        }
    }

    // Label position among the cells of a line (rows orientation only).
    let header_cells: Vec<String> = records[0].iter().map(str::to_string).collect();
    let label_cell = match (orientation, label_column) {
        (Orientation::SamplesAsRows, Some(LabelColumn::Name(name))) => Some(
            header_cells
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| csv_err(path, 1, 1, format!("no column named `{name}` in the header")))?,
        ),
        (Orientation::SamplesAsRows, Some(LabelColumn::Index(i))) => Some(*i),
        _ => None,
    };
    let has_header = matches!(label_column, Some(LabelColumn::Name(_)))
        || header_cells
            .iter()
            .enumerate()
            .any(|(j, c)| Some(j) != label_cell && c.parse::<f64>().is_err());
    let first_data = usize::from(has_header);
    let width = records[0].len();
    if let Some(j) = label_cell {
        if j >= width {
            return Err(csv_err(path, 1, j + 1, format!("label column {j} out of range ({width} columns)")));
        }
    }

    let label_line = match (orientation, label_column) {
        (Orientation::SamplesAsCols, Some(LabelColumn::Index(i))) => {
            if first_data + i >= records.len() {
                return Err(csv_err(
                    path,
                    first_data + 1,
                    1,
                    format!("label line {i} out of range ({} lines)", records.len() - first_data),
                ));
            }
            Some(first_data + i)
        }
        _ => None,
    };

    let mut numeric: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (offset, rec) in records.iter().enumerate().skip(first_data) {
        let line = offset + 1;
        if rec.len() != width {
            return Err(csv_err(
                path,
                line,
                rec.len().min(width) + 1,
                format!("ragged row: expected {width} fields, found {}", rec.len()),
            ));
        }
        if Some(offset) == label_line {
            for (j, cell) in rec.iter().enumerate() {
                if cell.is_empty() {
                    return Err(csv_err(path, line, j + 1, "missing label"));
                }
            }
            raw_labels = rec.iter().map(str::to_string).collect();
            continue;
        }
        let mut values = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_cell {
                if cell.is_empty() {
                    return Err(csv_err(path, line, j + 1, "missing label"));
                }
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_err(path, line, j + 1, format!("non-numeric cell `{cell}`")))?;
            if !v.is_finite() {
                return Err(csv_err(path, line, j + 1, format!("non-finite value `{cell}`")));
            }
            values.push(v);
        }
        numeric.push(values);
    }

    let lines = numeric.len();
    let cells = numeric.first().map_or(0, Vec::len);
    if lines == 0 || cells == 0 {
        return Err(csv_err(path, first_data + 1, 1, "table has no numeric data"));
    }
    let table = Array2::from_shape_fn((lines, cells), |(i, j)| T::lit(numeric[i][j]));
    let x = match orientation {
        Orientation::SamplesAsRows => table.t().to_owned(),
        Orientation::SamplesAsCols => table,
    };

    let (labels, class_names) = if raw_labels.is_empty() {
        (None, None)
    } else {
        let (ids, names) = index_labels(&raw_labels);
        (Some(LabelVector::new(ids)), Some(names))
    };
    let feature_names = (has_header && orientation == Orientation::SamplesAsRows).then(|| {
        header_cells
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != label_cell)
            .map(|(_, h)| h.clone())
            .collect()
    });
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut ds = Dataset::new(name, x, labels)?;
    ds.feature_names = feature_names;
    ds.class_names = class_names;
    Ok(ds)
}

/// First-occurrence class ids plus the distinct values in id order.
fn index_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut ids = HashMap::new();
    let mut names = Vec::new();
    let labels = raw
        .iter()
        .map(|v| {
            *ids.entry(v.clone()).or_insert_with(|| {
                names.push(v.clone());
                names.len() - 1
            })
        })
        .collect();
    (labels, names)
}

/// Writes `d` as CSV with a header line. Labels, when present, go in a final
/// `label` column (rows orientation) or a final `label` line (cols).
///
/// Values use the shortest representation that parses back to the same
/// number, so a write/load cycle is lossless.
pub fn write_csv<T: Scalar>(d: &Dataset<T>, path: impl AsRef<Path>, orientation: Orientation) -> Result<()> {
    let mut out = csv::Writer::from_writer(File::create(path.as_ref())?);
    let (m, n) = d.x.dim();
    let label_text = |j: usize| -> Option<String> {
        let l = d.labels.as_ref()?.as_slice()[j];
        Some(match &d.class_names {
            Some(names) => names[l].clone(),
            None => l.to_string(),
        })
    };
    match orientation {
        Orientation::SamplesAsRows => {
            let mut header: Vec<String> = match &d.feature_names {
                Some(names) => names.clone(),
                None => (0..m).map(|i| format!("f{i}")).collect(),
            };
            if d.labels.is_some() {
                header.push("label".into());
            }
            out.write_record(&header)?;
            for j in 0..n {
                let mut rec: Vec<String> = d.x.column(j).iter().map(|v| v.as_f64().to_string()).collect();
                if let Some(l) = label_text(j) {
                    rec.push(l);
                }
                out.write_record(&rec)?;
            }
        }
        Orientation::SamplesAsCols => {
            let header: Vec<String> = (0..n).map(|j| format!("s{j}")).collect();
            out.write_record(&header)?;
            for i in 0..m {
                out.write_record(d.x.row(i).iter().map(|v| v.as_f64().to_string()))?;
            }
            if d.labels.is_some() {
                out.write_record((0..n).map(|j| label_text(j).unwrap_or_default()))?;
            }
        }
    }
    out.flush()?;
    out.into_inner()
        .map_err(|e| NmfError::Io(e.into_error()))?
        .flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rows_orientation_transposes() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let d = load_csv::<f64>(f.path(), Orientation::SamplesAsRows, None).unwrap();
        assert_eq!(d.x.dim(), (2, 3));
        assert_eq!(d.x.row(0).to_vec(), vec![1.0, 3.0, 5.0]);
        assert!(d.labels.is_none());
        assert!(d.feature_names.is_none());
    }

    #[test]
    fn labels_first_occurrence() {
        let f = write_tmp("a,b,class\n1,2,b\n3,4,a\n5,6,b\n");
        let d = load_csv::<f64>(f.path(), Orientation::SamplesAsRows, Some(&LabelColumn::Name("class".into()))).unwrap();
        assert_eq!(d.labels.unwrap().as_slice(), &[0, 1, 0]);
        assert_eq!(d.class_names.unwrap(), vec!["b".to_string(), "a".to_string()]);
        assert_eq!(d.feature_names.unwrap(), vec!["a".to_string(), "b".to_string()]);
        assert_eq!(d.x.dim(), (2, 3));
    }

    #[test]
    fn label_by_index_without_header() {
        let f = write_tmp("x,1,2\ny,3,4\n");
        let d = load_csv::<f64>(f.path(), Orientation::SamplesAsRows, Some(&LabelColumn::Index(0))).unwrap();
        assert_eq!(d.labels.unwrap().as_slice(), &[0, 1]);
        assert_eq!(d.x.dim(), (2, 2));
    }

    #[test]
    fn cols_orientation_with_label_line() {
        let f = write_tmp("s0,s1,s2\n1,2,3\n4,5,6\n7,7,8\n");
        let d = load_csv::<f64>(f.path(), Orientation::SamplesAsCols, Some(&LabelColumn::Index(2))).unwrap();
        assert_eq!(d.x.dim(), (2, 3));
        assert_eq!(d.labels.unwrap().as_slice(), &[0, 0, 1]);
    }

    #[test]
    fn ragged_row_diagnostic() {
        let f = write_tmp("1,2,3\n4,5\n");
        match load_csv::<f64>(f.path(), Orientation::SamplesAsRows, None) {
            Err(NmfError::Csv { row, column, .. }) => assert_eq!((row, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_diagnostic() {
        let f = write_tmp("a,b\n1,2\n3,oops\n");
        match load_csv::<f64>(f.path(), Orientation::SamplesAsRows, None) {
            Err(NmfError::Csv { row, column, message, .. }) => {
                assert_eq!((row, column), (3, 2));
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_column() {
        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(
            load_csv::<f64>(f.path(), Orientation::SamplesAsRows, Some(&LabelColumn::Name("class".into()))),
            Err(NmfError::Csv { .. })
        ));
    }

    #[test]
    fn label_column_parse() {
        assert_eq!("3".parse::<LabelColumn>().unwrap(), LabelColumn::Index(3));
        assert_eq!("class".parse::<LabelColumn>().unwrap(), LabelColumn::Name("class".into()));
    }
}
