use std::io::{Read, Write};
use std::path::Path;

use crate::data::ingest::read_table;
use crate::data::{Dataset, Slot};
use crate::error::{Error, Result};
use crate::synth::SyntheticRecord;

/// Columns appended after the original header, in this order.
pub const METADATA_COLUMNS: [&str; 5] = [
    "angular_distance",
    "rotation_angle",
    "synthetic",
    "boosted",
    "source_row_id",
];

/// Original rows plus the synthetic rows generated from them.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTable {
    pub original: Dataset,
    /// Angular distance of each original row from the centroid, where measured.
    pub original_angular: Vec<Option<f64>>,
    /// Label carried by every synthetic row.
    pub minority_label: u32,
    pub synthetic: Vec<SyntheticRecord>,
}

impl AugmentedTable {
    pub fn len(&self) -> usize {
        self.original.len() + self.synthetic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn minority_count(&self) -> usize {
        let originals = self
            .original
            .labels
            .iter()
            .filter(|&&l| l == self.minority_label)
            .count();
        originals + self.synthetic.len()
    }

    /// Minority share of all rows, in percent.
    pub fn minority_percent(&self) -> f64 {
        100.0 * self.minority_count() as f64 / self.len() as f64
    }

    /// Angular distances of measured originals followed by every synthetic row.
    pub fn minority_angular_distances(&self) -> Vec<f64> {
        self.original_angular
            .iter()
            .flatten()
            .copied()
            .chain(self.synthetic.iter().map(|s| s.angular_distance))
            .collect()
    }

    /// Snaps synthetic values of discrete columns back onto their levels.
    pub fn round_synthetic(&mut self, levels: &[Option<u32>]) {
        for rec in &mut self.synthetic {
            super::round_to_levels(&mut rec.features, levels);
        }
    }

    /// Flattens into a plain dataset; synthetic rows get ids `syn-<i>`.
    pub fn to_dataset(&self) -> Dataset {
        let mut ds = self.original.clone();
        for (i, rec) in self.synthetic.iter().enumerate() {
            ds.features.push(rec.features.clone());
            ds.labels.push(self.minority_label);
            ds.row_ids.push(format!("syn-{i}"));
        }
        ds
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes originals first, then synthetic rows in generation order.
pub fn write_augmented_to<W: Write>(table: &AugmentedTable, out: W) -> Result<()> {
    let ds = &table.original;
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = ds.header();
    header.extend(METADATA_COLUMNS.iter().map(|s| s.to_string()));
    wtr.write_record(&header)?;

    for r in 0..ds.len() {
        let mut cells = ds.row_cells(r);
        cells.push(table.original_angular[r].map(|a| a.to_string()).unwrap_or_default());
        cells.extend(["".into(), "0".into(), "0".into(), "".into()]);
        wtr.write_record(&cells)?;
    }
    for rec in &table.synthetic {
        let mut cells: Vec<String> = ds
            .layout
            .iter()
            .map(|slot| match slot {
                Slot::Id => String::new(),
                Slot::Feature(i) => rec.features[*i].to_string(),
                Slot::Target => table.minority_label.to_string(),
            })
            .collect();
        cells.push(rec.angular_distance.to_string());
        cells.push(rec.rotation_angle.to_string());
        cells.push(flag(rec.synthetic).into());
        cells.push(flag(rec.boosted).into());
        cells.push(rec.source_row_id.clone());
        wtr.write_record(&cells)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_augmented(table: &AugmentedTable, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_augmented_to(table, &mut buf)?;
    let path = path.as_ref();
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_augmented(path: impl AsRef<Path>, target: &str, id: Option<&str>) -> Result<AugmentedTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_augmented_reader(std::io::BufReader::new(file), target, id)
}

fn cell_err(line: usize, column: &str, message: String) -> Error {
    Error::Cell {
        line,
        column: column.to_owned(),
        message,
    }
}

fn parse_f64(s: &str, line: usize, column: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(cell_err(line, column, format!("`{s}` is not a finite number"))),
    }
}

fn parse_flag(s: &str, line: usize, column: &str) -> Result<bool> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(cell_err(line, column, format!("`{other}` is not 0 or 1"))),
    }
}

/// Parses a file produced by [`write_augmented_to`]. The target column and
/// optional id column are named by the caller; every other base column is a
/// feature.
pub fn read_augmented_reader<R: Read>(reader: R, target: &str, id: Option<&str>) -> Result<AugmentedTable> {
    let (header, rows) = read_table(reader)?;
    let base_len = header
        .len()
        .checked_sub(METADATA_COLUMNS.len())
        .ok_or_else(|| Error::Config("augmented CSV is missing metadata columns".into()))?;
    for (got, want) in header[base_len..].iter().zip(METADATA_COLUMNS) {
        if got != want {
            return Err(Error::Config(format!(
                "expected metadata column `{want}`, found `{got}`"
            )));
        }
    }
    let base = &header[..base_len];

    let mut layout = Vec::with_capacity(base_len);
    let mut feature_names = Vec::new();
    let mut id_column = None;
    let mut target_seen = false;
    for name in base {
        if name == target {
            if target_seen {
                return Err(Error::Config(format!("target column `{target}` appears twice")));
            }
            target_seen = true;
            layout.push(Slot::Target);
        } else if Some(name.as_str()) == id {
            if id_column.is_some() {
                return Err(Error::Config(format!("id column `{name}` appears twice")));
            }
            id_column = Some(name.clone());
            layout.push(Slot::Id);
        } else {
            layout.push(Slot::Feature(feature_names.len()));
            feature_names.push(name.clone());
        }
    }
    if !target_seen {
        return Err(Error::MissingColumn(target.to_owned()));
    }
    if let (Some(id), None) = (id, &id_column) {
        return Err(Error::MissingColumn(id.to_owned()));
    }

    let mut original = Dataset {
        id_column,
        target_name: target.to_owned(),
        feature_names,
        layout,
        features: Vec::new(),
        labels: Vec::new(),
        row_ids: Vec::new(),
    };
    let mut original_angular = Vec::new();
    let mut synthetic = Vec::new();
    let mut synthetic_label: Option<u32> = None;

    let [ad_col, rot_col, syn_col, boost_col, _] = METADATA_COLUMNS;
    for (line, cells) in rows {
        let meta = &cells[base_len..];
        let is_synthetic = parse_flag(&meta[2], line, syn_col)?;
        let mut features = vec![0.0; original.feature_names.len()];
        let mut label = 0;
        let mut row_id = String::new();
        for (slot, cell) in original.layout.iter().zip(&cells[..base_len]) {
            match slot {
                Slot::Id => row_id = cell.clone(),
                Slot::Feature(i) => {
                    features[*i] = parse_f64(cell, line, &original.feature_names[*i])?;
                }
                Slot::Target => {
                    label = cell
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| cell_err(line, target, format!("`{cell}` is not a class code")))?;
                }
            }
        }
        if is_synthetic {
            match synthetic_label {
                None => synthetic_label = Some(label),
                Some(l) if l != label => {
                    return Err(cell_err(line, target, "synthetic rows carry different labels".into()))
                }
                _ => {}
            }
            synthetic.push(SyntheticRecord {
                features,
                source_row_id: meta[4].clone(),
                rotation_angle: parse_f64(&meta[1], line, rot_col)?,
                angular_distance: parse_f64(&meta[0], line, ad_col)?,
                boosted: parse_flag(&meta[3], line, boost_col)?,
                synthetic: true,
            });
        } else {
            if !synthetic.is_empty() {
                return Err(cell_err(line, syn_col, "original row after synthetic rows".into()));
            }
            if original.id_column.is_none() {
                row_id = original.len().to_string();
            }
            original.features.push(features);
            original.labels.push(label);
            original.row_ids.push(row_id);
            original_angular.push(match meta[0].trim() {
                "" => None,
                s => Some(parse_f64(s, line, ad_col)?),
            });
        }
    }
    let minority_label = synthetic_label
        .or_else(|| original.minority_label())
        .ok_or_else(|| Error::Empty("augmented CSV has no rows".into()))?;
    Ok(AugmentedTable {
        original,
        original_angular,
        minority_label,
        synthetic,
    })
}
