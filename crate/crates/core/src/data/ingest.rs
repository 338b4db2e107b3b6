use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::aol::quantile_sorted;
use crate::data::config::{BinSpec, ColumnKind, ColumnSpec, DataConfig, MissingPolicy, BINNED_SUFFIX};
use crate::data::{Dataset, Slot};
use crate::error::{Error, Result};

const MISSING_TOKENS: [&str; 4] = ["", "na", "nan", "null"];

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_TOKENS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Orders level strings numerically when every level parses as a number,
/// lexicographically otherwise. Numeric ordering keeps re-encoding of already
/// encoded columns stable ("10" after "9").
fn sort_levels(levels: &mut [String]) {
    let numeric: Option<Vec<f64>> = levels.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    if numeric.is_some() {
        levels.sort_by(|a, b| {
            let (x, y) = (a.trim().parse::<f64>().unwrap(), b.trim().parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        });
    } else {
        levels.sort();
    }
}

/// How one input header column is interpreted.
struct Resolved {
    spec: ColumnSpec,
    /// Set when the column was already binned by an earlier pass.
    prebinned: bool,
}

fn resolve_columns(header: &[String], config: &DataConfig) -> Result<Vec<Resolved>> {
    let mut used = vec![false; config.columns.len()];
    let mut resolved = Vec::with_capacity(header.len());
    for name in header {
        let exact = config.columns.iter().position(|c| &c.name == name);
        let binned = config
            .columns
            .iter()
            .position(|c| c.kind == ColumnKind::NumericBinned && format!("{}{}", c.name, BINNED_SUFFIX) == *name);
        let (idx, prebinned) = match (exact, binned) {
            (Some(i), _) => (Some(i), false),
            (None, Some(i)) => (Some(i), true),
            (None, None) => (None, false),
        };
        let spec = match idx {
            Some(i) => {
                if used[i] {
                    return Err(Error::Config(format!(
                        "column `{}` appears more than once in the header",
                        config.columns[i].name
                    )));
                }
                used[i] = true;
                config.columns[i].clone()
            }
            None => match config.default_kind {
                Some(kind) => ColumnSpec::new(name.clone(), kind),
                None => return Err(Error::UnknownColumn(name.clone())),
            },
        };
        resolved.push(Resolved { spec, prebinned });
    }
    // ignored columns are not written back out, so they may be absent
    if let Some(spec) = config
        .columns
        .iter()
        .zip(&used)
        .find(|(c, used)| !**used && c.kind != ColumnKind::Ignore)
        .map(|(c, _)| c)
    {
        return Err(Error::MissingColumn(spec.name.clone()));
    }
    Ok(resolved)
}

/// Header plus `(line number, cells)` for every data row.
pub(crate) type Table = (Vec<String>, Vec<(usize, Vec<String>)>);

pub(crate) fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Empty("CSV has no header row".into()));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok((header, rows))
}

/// Loads and preprocesses a CSV file.
pub fn load_csv(path: impl AsRef<Path>, config: &DataConfig) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_reader(std::io::BufReader::new(file), config)
}

/// Preprocesses CSV text from any reader. See [`load_csv`].
pub fn load_csv_reader<R: Read>(reader: R, config: &DataConfig) -> Result<Dataset> {
    config.validate()?;
    let (header, rows) = read_table(reader)?;
    let columns = resolve_columns(&header, config)?;
    if rows.is_empty() {
        return Err(Error::Empty("CSV has a header but no data rows".into()));
    }

    // Missing values: drop rows first, then fill from the surviving rows.
    let mut keep = vec![true; rows.len()];
    for (c, col) in columns.iter().enumerate() {
        if col.spec.kind == ColumnKind::Ignore {
            continue;
        }
        for (r, (line, cells)) in rows.iter().enumerate() {
            if !is_missing(&cells[c]) {
                continue;
            }
            match col.spec.missing {
                Some(MissingPolicy::DropRow) => keep[r] = false,
                Some(_) => {}
                None => {
                    return Err(Error::Cell {
                        line: *line,
                        column: col.spec.name.clone(),
                        message: "missing value and no missing policy".into(),
                    })
                }
            }
        }
    }
    let mut table: Vec<(usize, Vec<String>)> = rows
        .into_iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(row, _)| row)
        .collect();
    if table.is_empty() {
        return Err(Error::Empty("every row was dropped by the missing-value policy".into()));
    }
    for (c, col) in columns.iter().enumerate() {
        let fill = match &col.spec.missing {
            Some(MissingPolicy::FillValue(v)) => v.clone(),
            Some(MissingPolicy::FillMode) => match mode(table.iter().map(|t| t.1[c].as_str())) {
                Some(m) => m,
                None => {
                    return Err(Error::Cell {
                        line: table[0].0,
                        column: col.spec.name.clone(),
                        message: "fill-mode on a column with no values".into(),
                    })
                }
            },
            _ => continue,
        };
        for row in table.iter_mut() {
            if is_missing(&row.1[c]) {
                row.1[c] = fill.clone();
            }
        }
    }

    let mut layout = Vec::new();
    let mut feature_names = Vec::new();
    let mut feature_columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = None;
    let mut row_ids = None;
    let mut id_column = None;
    let mut target_name = String::new();

    for (c, col) in columns.iter().enumerate() {
        let name = &col.spec.name;
        let cells = || table.iter().map(move |(line, cells)| (*line, cells[c].trim()));
        match col.spec.kind {
            ColumnKind::Ignore => {}
            ColumnKind::Id => {
                id_column = Some(name.clone());
                row_ids = Some(cells().map(|(_, s)| s.to_owned()).collect::<Vec<_>>());
                layout.push(Slot::Id);
            }
            ColumnKind::Target => {
                target_name = name.clone();
                labels = Some(encode_levels(cells().map(|(_, s)| s)));
                layout.push(Slot::Target);
            }
            ColumnKind::Categorical => {
                let codes = encode_levels(cells().map(|(_, s)| s));
                layout.push(Slot::Feature(feature_columns.len()));
                feature_names.push(name.clone());
                feature_columns.push(codes.into_iter().map(f64::from).collect());
            }
            ColumnKind::NumericRaw => {
                let values = parse_numbers(cells(), name)?;
                layout.push(Slot::Feature(feature_columns.len()));
                feature_names.push(name.clone());
                feature_columns.push(values);
            }
            ColumnKind::NumericBinned => {
                let spec = col.spec.bins.as_ref().expect("validated");
                let values = parse_numbers(cells(), &col.spec.processed_name())?;
                let binned = if col.prebinned {
                    check_bin_codes(&values, spec, table.iter().map(|t| t.0), &col.spec.processed_name())?
                } else {
                    let edges = bin_edges(&values, spec);
                    values.iter().map(|&v| bin_index(&edges, v) as f64).collect()
                };
                layout.push(Slot::Feature(feature_columns.len()));
                feature_names.push(col.spec.processed_name());
                feature_columns.push(binned);
            }
        }
    }

    let n = table.len();
    let features = (0..n)
        .map(|r| feature_columns.iter().map(|col| col[r]).collect())
        .collect();
    // without an id column rows are numbered after missing-value drops
    let row_ids = row_ids.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
    let dataset = Dataset {
        id_column,
        target_name,
        feature_names,
        layout,
        features,
        labels: labels.expect("validated config has a target"),
        row_ids,
    };
    dataset.check()?;
    Ok(dataset)
}

fn parse_numbers<'a>(cells: impl Iterator<Item = (usize, &'a str)>, column: &str) -> Result<Vec<f64>> {
    cells
        .map(|(line, s)| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Cell {
                line,
                column: column.to_owned(),
                message: format!("`{s}` is not a finite number"),
            }),
        })
        .collect()
}

fn check_bin_codes(
    values: &[f64],
    spec: &BinSpec,
    lines: impl Iterator<Item = usize>,
    column: &str,
) -> Result<Vec<f64>> {
    let limit = spec.max_bins() as f64;
    for (&v, line) in values.iter().zip(lines) {
        if v < 0.0 || v >= limit || v.fract() != 0.0 {
            return Err(Error::Cell {
                line,
                column: column.to_owned(),
                message: format!("`{v}` is not a bin index below {limit}"),
            });
        }
    }
    Ok(values.to_vec())
}

/// Assigns codes 0..k−1 to the distinct values in level order.
fn encode_levels<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> Vec<u32> {
    let mut levels: Vec<String> = cells.clone().map(str::to_owned).collect();
    sort_levels(&mut levels);
    levels.dedup();
    let index: HashMap<&str, u32> = levels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect();
    cells.map(|c| index[c]).collect()
}

/// Most frequent non-missing value; ties go to the first in level order.
fn mode<'a>(cells: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in cells.filter(|c| !is_missing(c)) {
        *counts.entry(c.trim()).or_default() += 1;
    }
    let best = *counts.values().max()?;
    let mut tied: Vec<String> = counts
        .into_iter()
        .filter(|&(_, n)| n == best)
        .map(|(k, _)| k.to_owned())
        .collect();
    sort_levels(&mut tied);
    tied.into_iter().next()
}

/// Bin edges for `values` under `spec`. Equal-width edges span [min, max];
/// a constant column is widened by ±0.5 first.
pub fn bin_edges(values: &[f64], spec: &BinSpec) -> Vec<f64> {
    match spec {
        BinSpec::Edges(e) => e.clone(),
        BinSpec::EqualWidth(k) => {
            let (lo, hi) = min_max(values);
            let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
            let width = (hi - lo) / *k as f64;
            let mut edges: Vec<f64> = (0..*k).map(|i| lo + width * i as f64).collect();
            edges.push(hi);
            edges
        }
        BinSpec::Quantile(k) => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut edges: Vec<f64> = (0..=*k)
                .map(|i| quantile_sorted(&sorted, i as f64 / *k as f64))
                .collect();
            edges.dedup();
            if edges.len() < 2 {
                let v = edges[0];
                edges = vec![v - 0.5, v + 0.5];
            }
            edges
        }
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

/// Index `i` with `edges[i] <= v < edges[i+1]`; values below the first edge
/// go to bin 0 and values at or above the last edge to the last bin.
pub fn bin_index(edges: &[f64], v: f64) -> usize {
    let last = edges.len() - 2;
    if v < edges[0] {
        return 0;
    }
    // first edge strictly greater than v
    let upper = edges.partition_point(|&e| e <= v);
    (upper.saturating_sub(1)).min(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::config::ColumnSpec;

    fn config(columns: Vec<ColumnSpec>) -> DataConfig {
        DataConfig {
            version: 1,
            default_kind: None,
            columns,
        }
    }

    fn binned(name: &str, bins: BinSpec) -> ColumnSpec {
        ColumnSpec {
            bins: Some(bins),
            ..ColumnSpec::new(name, ColumnKind::NumericBinned)
        }
    }

    #[test]
    fn equal_width_edges() {
        let values: Vec<f64> = (0..=10).map(f64::from).collect();
        let edges = bin_edges(&values, &BinSpec::EqualWidth(2));
        assert_eq!(edges, vec![0.0, 5.0, 10.0]);
        let bins: Vec<usize> = values.iter().map(|&v| bin_index(&edges, v)).collect();
        assert_eq!(bins, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn bin_index_out_of_range() {
        let edges = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bin_index(&edges, -5.0), 0);
        assert_eq!(bin_index(&edges, 99.0), 2);
        assert_eq!(bin_index(&edges, 3.0), 2);
        assert_eq!(bin_index(&edges, 1.0), 1);
        assert_eq!(bin_index(&edges, 0.999), 0);
    }

    #[test]
    fn quantile_edges_dedup() {
        let values = [1.0, 1.0, 1.0, 1.0, 2.0];
        let edges = bin_edges(&values, &BinSpec::Quantile(4));
        assert_eq!(edges, vec![1.0, 2.0]);
        let constant = bin_edges(&[4.0, 4.0], &BinSpec::Quantile(3));
        assert_eq!(constant, vec![3.5, 4.5]);
    }

    #[test]
    fn categorical_levels_lexicographic() {
        let csv = "answer,t\nyes,a\nno,b\nyes,a\n";
        let cfg = config(vec![
            ColumnSpec::new("answer", ColumnKind::Categorical),
            ColumnSpec::new("t", ColumnKind::Target),
        ]);
        let ds = load_csv_reader(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(ds.features, vec![vec![1.0], vec![0.0], vec![1.0]]);
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.row_ids, vec!["0", "1", "2"]);
    }

    #[test]
    fn numeric_levels_sort_numerically() {
        let mut levels: Vec<String> = ["10", "9", "2", "0"].iter().map(|s| s.to_string()).collect();
        sort_levels(&mut levels);
        assert_eq!(levels, vec!["0", "2", "9", "10"]);
    }

    #[test]
    fn missing_policies() {
        let csv = "a,b,c,t\n1,,x,0\n,2,y,1\n3,4,,0\n5,4,y,1\n";
        let mut a = ColumnSpec::new("a", ColumnKind::NumericRaw);
        a.missing = Some(MissingPolicy::DropRow);
        let mut b = ColumnSpec::new("b", ColumnKind::NumericRaw);
        b.missing = Some(MissingPolicy::FillValue("-1".into()));
        let mut c = ColumnSpec::new("c", ColumnKind::Categorical);
        c.missing = Some(MissingPolicy::FillMode);
        let cfg = config(vec![a, b, c, ColumnSpec::new("t", ColumnKind::Target)]);
        let ds = load_csv_reader(csv.as_bytes(), &cfg).unwrap();
        // row 1 dropped; "c" mode among survivors {x, y} is a tie -> "x"
        assert_eq!(ds.row_ids, vec!["0", "1", "2"]);
        assert_eq!(
            ds.features,
            vec![vec![1.0, -1.0, 0.0], vec![3.0, 4.0, 0.0], vec![5.0, 4.0, 1.0]]
        );
    }

    #[test]
    fn structured_errors() {
        let cfg = config(vec![
            ColumnSpec::new("a", ColumnKind::NumericRaw),
            ColumnSpec::new("t", ColumnKind::Target),
        ]);
        let err = load_csv_reader("a,t\n1,0\n,1\n".as_bytes(), &cfg).unwrap_err();
        assert!(
            matches!(err, Error::Cell { line: 3, ref column, .. } if column == "a"),
            "{err}"
        );
        let err = load_csv_reader("a,t\n1,0\nabc,1\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Cell { line: 3, .. }), "{err}");
        let err = load_csv_reader("a,t,extra\n1,0,2\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::UnknownColumn(ref c) if c == "extra"), "{err}");
        let err = load_csv_reader("t\n1\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "a"), "{err}");
        assert!(matches!(load_csv_reader("".as_bytes(), &cfg), Err(Error::Empty(_))));
        assert!(matches!(
            load_csv_reader("a,t\n".as_bytes(), &cfg),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn id_and_ignore_columns() {
        let csv = "cid,junk,x,t\nc1,zz,1.5,no\nc2,,2.5,yes\n";
        let cfg = config(vec![
            ColumnSpec::new("cid", ColumnKind::Id),
            ColumnSpec::new("junk", ColumnKind::Ignore),
            ColumnSpec::new("x", ColumnKind::NumericRaw),
            ColumnSpec::new("t", ColumnKind::Target),
        ]);
        let ds = load_csv_reader(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(ds.row_ids, vec!["c1", "c2"]);
        assert_eq!(ds.feature_names, vec!["x"]);
        assert_eq!(ds.layout, vec![Slot::Id, Slot::Feature(0), Slot::Target]);
        assert_eq!(ds.labels, vec![0, 1]);
    }

    #[test]
    fn binned_column_renamed_and_reloadable() {
        let csv = "v,t\n0,0\n2.5,0\n5,1\n7.5,1\n10,0\n";
        let cfg = config(vec![
            binned("v", BinSpec::EqualWidth(2)),
            ColumnSpec::new("t", ColumnKind::Target),
        ]);
        let ds = load_csv_reader(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(ds.feature_names, vec!["v_Bin"]);
        let col: Vec<f64> = ds.features.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![0.0, 0.0, 1.0, 1.0, 1.0]);

        let again = load_csv_reader("v_Bin,t\n0,0\n1,1\n".as_bytes(), &cfg).unwrap();
        assert_eq!(again.features, vec![vec![0.0], vec![1.0]]);
        let err = load_csv_reader("v_Bin,t\n0,0\n2,1\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Cell { .. }), "{err}");
    }
}
