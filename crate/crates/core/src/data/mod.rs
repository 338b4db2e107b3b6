//! Dataset ingestion, CSV serialization and histogram output.

mod augmented;
pub mod config;
pub mod demo;
mod histogram;
mod ingest;

use std::io::Write;
use std::path::Path;

pub use augmented::{
    read_augmented, read_augmented_reader, write_augmented, write_augmented_to, AugmentedTable, METADATA_COLUMNS,
};
pub use config::{BinSpec, ColumnKind, ColumnSpec, DataConfig, MissingPolicy, RUN_SECTIONS};
pub use histogram::{emit_histogram, histogram_csv, histogram_svg, Histogram};
pub use ingest::{bin_edges, bin_index, load_csv, load_csv_reader};

use crate::error::{Error, Result};

/// Position of a column in the processed header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Id,
    Feature(usize),
    Target,
}

/// A fully encoded table: every feature is a finite number and every label a
/// class code.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id_column: Option<String>,
    pub target_name: String,
    pub feature_names: Vec<String>,
    /// Column order used when the dataset is written back out.
    pub layout: Vec<Slot>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u32>,
    pub row_ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with columns `features..., target` and row ids 0..n.
    pub fn from_parts(
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<u32>,
    ) -> Result<Self> {
        let mut layout: Vec<Slot> = (0..feature_names.len()).map(Slot::Feature).collect();
        layout.push(Slot::Target);
        let ds = Self {
            id_column: None,
            target_name: target_name.into(),
            row_ids: (0..features.len()).map(|i| i.to_string()).collect(),
            feature_names,
            layout,
            features,
            labels,
        };
        ds.check()?;
        Ok(ds)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.features.len();
        if self.labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.labels.len(),
            });
        }
        if self.row_ids.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.row_ids.len(),
            });
        }
        let width = self.feature_names.len();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    got: row.len(),
                }
                .at_row(i));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateInput("non-finite feature value".into()).at_row(i));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Header names in output order.
    pub fn header(&self) -> Vec<String> {
        self.layout
            .iter()
            .map(|slot| match slot {
                Slot::Id => self.id_column.clone().unwrap_or_default(),
                Slot::Feature(i) => self.feature_names[*i].clone(),
                Slot::Target => self.target_name.clone(),
            })
            .collect()
    }

    /// `(label, count)` pairs in label order.
    pub fn class_counts(&self) -> Vec<(u32, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for &l in &self.labels {
            *counts.entry(l).or_insert(0usize) += 1;
        }
        counts.into_iter().collect()
    }

    /// Least frequent label; ties go to the smaller code.
    pub fn minority_label(&self) -> Option<u32> {
        self.class_counts()
            .into_iter()
            .min_by_key(|&(label, count)| (count, label))
            .map(|(label, _)| label)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            id_column: self.id_column.clone(),
            target_name: self.target_name.clone(),
            feature_names: self.feature_names.clone(),
            layout: self.layout.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    pub(crate) fn row_cells(&self, row: usize) -> Vec<String> {
        self.layout
            .iter()
            .map(|slot| match slot {
                Slot::Id => self.row_ids[row].clone(),
                Slot::Feature(i) => self.features[row][*i].to_string(),
                Slot::Target => self.labels[row].to_string(),
            })
            .collect()
    }
}

/// Writes the processed dataset as CSV.
pub fn write_processed_to<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(dataset.header())?;
    for r in 0..dataset.len() {
        wtr.write_record(dataset.row_cells(r))?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_processed(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_processed_to(dataset, &mut buf)?;
    let path = path.as_ref();
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Rounds values of discrete columns to the nearest level.
///
/// `levels[c]` is the number of levels of feature `c`, or `None` to leave the
/// column continuous.
pub fn round_to_levels(features: &mut [f64], levels: &[Option<u32>]) {
    for (v, l) in features.iter_mut().zip(levels) {
        if let Some(k) = l {
            *v = v.round().clamp(0.0, k.saturating_sub(1) as f64);
        }
    }
}

/// Level counts for the columns of `dataset` marked `round_synthetic` in
/// `config`.
pub fn rounding_levels(dataset: &Dataset, config: &DataConfig) -> Vec<Option<u32>> {
    dataset
        .feature_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let spec = config
                .columns
                .iter()
                .find(|c| &c.processed_name() == name || &c.name == name)?;
            if !spec.round_synthetic {
                return None;
            }
            match spec.kind {
                ColumnKind::Categorical | ColumnKind::NumericBinned => {
                    let max = dataset.features.iter().map(|r| r[i]).fold(0.0, f64::max);
                    Some(max as u32 + 1)
                }
                _ => None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_clamps_to_levels() {
        let mut v = vec![2.6, -0.4, 7.2, 1.49];
        round_to_levels(&mut v, &[Some(3), Some(3), Some(5), None]);
        assert_eq!(v, vec![2.0, 0.0, 4.0, 1.49]);
    }

    #[test]
    fn minority_label_ties_prefer_smaller_code() {
        let ds = Dataset::from_parts(vec!["x".into()], "t", vec![vec![1.0]; 4], vec![1, 0, 1, 0]).unwrap();
        assert_eq!(ds.minority_label(), Some(0));
    }

    #[test]
    fn from_parts_checks_shapes() {
        assert!(Dataset::from_parts(vec!["x".into()], "t", vec![vec![1.0, 2.0]], vec![0]).is_err());
        assert!(Dataset::from_parts(vec!["x".into()], "t", vec![vec![1.0]], vec![0, 1]).is_err());
        assert!(Dataset::from_parts(vec!["x".into()], "t", vec![vec![f64::NAN]], vec![0]).is_err());
    }
}
