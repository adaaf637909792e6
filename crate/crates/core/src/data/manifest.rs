use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_csv, stratified_sample, Dataset, LabelColumn, Orientation};
use crate::error::{NmfError, Result};
use crate::scalar::Scalar;

/// JSON description of an on-disk dataset.
///
/// A relative `path` is resolved against the directory holding the
/// manifest. When `sample_fraction` or `min_class_size` is set, a stratified
/// subsample is drawn with `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default)]
    pub label_column: Option<LabelColumn>,
    #[serde(default)]
    pub sample_fraction: Option<f64>,
    #[serde(default)]
    pub min_class_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Directory the manifest was read from.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    /// A manifest for a CSV file with samples as rows.
    pub fn for_csv(path: impl Into<PathBuf>, label_column: Option<LabelColumn>) -> Self {
        let path = path.into();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        DatasetManifest {
            name,
            path,
            orientation: Orientation::SamplesAsRows,
            label_column,
            sample_fraction: None,
            min_class_size: None,
            seed: 0,
            base_dir: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| NmfError::Schema(format!("{}: {e}", path.display())))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf);
        Ok(manifest)
    }

    pub fn data_path(&self) -> PathBuf {
        match &self.base_dir {
            Some(dir) if self.path.is_relative() => dir.join(&self.path),
            _ => self.path.clone(),
        }
    }

    /// Reads the table and applies the subsampling protocol.
    pub fn load_dataset<T: Scalar>(&self) -> Result<Dataset<T>> {
        let mut d = load_csv(self.data_path(), self.orientation, self.label_column.as_ref())?;
        d.name = self.name.clone();
        if self.sample_fraction.is_some() || self.min_class_size.is_some() {
            d = stratified_sample(&d, self.sample_fraction.unwrap_or(1.0), self.seed, self.min_class_size)?;
        }
        Ok(d)
    }
}
