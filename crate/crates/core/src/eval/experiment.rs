use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::knn::{knn_predict, Standardizer, DEFAULT_K};
use super::metrics::{compute_metrics, MetricsReport};
use crate::data::{AugmentedTable, Dataset};
use crate::error::{Error, Result};
use crate::pipeline::{run_smote, SmoteConfig};
use crate::rng;

/// Minority percentages of the reference sweep.
pub const DEFAULT_GRID: [f64; 10] = [30.0, 32.0, 34.0, 36.0, 38.0, 40.0, 42.0, 45.0, 48.0, 50.0];

/// Deserializes from an `[evaluate]` table; `smote` and `rounding` are
/// filled in by the caller.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Target minority percentages; a baseline row is always emitted first.
    pub targets: Vec<f64>,
    /// AOL settings run at every target.
    pub aol_modes: Vec<bool>,
    pub test_fraction: f64,
    pub k: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Template for every run; target percent and aol are overwritten.
    #[serde(skip)]
    pub smote: SmoteConfig,
    /// Z-score features with statistics of the original training rows.
    pub standardize: bool,
    /// Level counts for rounding synthetic values, per feature; may be empty.
    #[serde(skip)]
    pub rounding: Vec<Option<u32>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            targets: DEFAULT_GRID.to_vec(),
            aol_modes: vec![false, true],
            test_fraction: 0.2,
            k: DEFAULT_K,
            threshold: 0.5,
            seed: 0,
            smote: SmoteConfig::default(),
            standardize: true,
            rounding: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// `None` for the baseline without synthetic rows.
    pub target_percent: Option<f64>,
    pub aol: bool,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    /// Minority share of the training set actually fitted.
    pub train_minority_percent: f64,
    pub accuracy_train: f64,
    pub accuracy_test: f64,
    pub f1: Option<f64>,
    pub pr_auc: Option<f64>,
    pub roc_auc: Option<f64>,
}

/// Per-class seeded shuffle; each class contributes `round(n_c · fraction)`
/// rows to the test side, keeping at least one row on each side when the
/// class has two or more. Both index lists come back sorted.
pub fn stratified_split(labels: &[u32], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in by_class {
        idx.shuffle(&mut rng::stream(seed, &[rng::TAG_SPLIT, u64::from(label)]));
        let n = idx.len();
        let mut n_test = (n as f64 * test_fraction).round() as usize;
        if n >= 2 {
            n_test = n_test.clamp(1, n - 1);
        }
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

struct Scored {
    train_accuracy: f64,
    test: MetricsReport,
}

fn fit_and_score(
    train: &[Vec<f64>],
    train_pos: &[bool],
    test: &[Vec<f64>],
    test_pos: &[bool],
    scaler: Option<&Standardizer>,
    k: usize,
    threshold: f64,
) -> Result<Scored> {
    let (train, test) = match scaler {
        Some(s) => (s.transform_all(train), s.transform_all(test)),
        None => (train.to_vec(), test.to_vec()),
    };
    let train_scores = knn_predict(&train, train_pos, &train, k)?;
    let test_scores = knn_predict(&train, train_pos, &test, k)?;
    Ok(Scored {
        train_accuracy: compute_metrics(&train_scores, train_pos, threshold)?.accuracy,
        test: compute_metrics(&test_scores, test_pos, threshold)?,
    })
}

fn row_from(target: Option<f64>, aol: bool, train_pos: &[bool], synthetic: usize, s: Scored) -> ExperimentRow {
    let minority = train_pos.iter().filter(|&&p| p).count();
    ExperimentRow {
        target_percent: target,
        aol,
        train_rows: train_pos.len(),
        synthetic_rows: synthetic,
        train_minority_percent: 100.0 * minority as f64 / train_pos.len() as f64,
        accuracy_train: s.train_accuracy,
        accuracy_test: s.test.accuracy,
        f1: s.test.f1,
        pr_auc: s.test.pr_auc,
        roc_auc: s.test.roc_auc,
    }
}

/// Ids of the synthetic rows' sources must all belong to the training split.
fn check_no_leak(table: &AugmentedTable, test_ids: &HashSet<&str>) -> Result<()> {
    match table
        .synthetic
        .iter()
        .find(|s| test_ids.contains(s.source_row_id.as_str()))
    {
        Some(s) => Err(Error::DegenerateInput(format!(
            "synthetic row derived from test row `{}`",
            s.source_row_id
        ))),
        None => Ok(()),
    }
}

/// Baseline plus one row per (target, aol) pair. Synthesis only ever sees the
/// training split; the test split is shared by every row.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let minority_label = match config.smote.minority_label {
        Some(l) => l,
        None => dataset
            .minority_label()
            .ok_or_else(|| Error::Empty("dataset has no rows".into()))?,
    };
    let (train_idx, test_idx) = stratified_split(&dataset.labels, config.test_fraction, config.seed)?;
    let train = dataset.subset(&train_idx);
    let test = dataset.subset(&test_idx);
    let test_ids: HashSet<&str> = test.row_ids.iter().map(String::as_str).collect();
    let test_pos: Vec<bool> = test.labels.iter().map(|&l| l == minority_label).collect();
    let train_pos: Vec<bool> = train.labels.iter().map(|&l| l == minority_label).collect();
    let scaler = if config.standardize {
        Some(Standardizer::fit(&train.features)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    let base = fit_and_score(
        &train.features,
        &train_pos,
        &test.features,
        &test_pos,
        scaler.as_ref(),
        config.k,
        config.threshold,
    )?;
    rows.push(row_from(None, false, &train_pos, 0, base));

    for &t in &config.targets {
        for &aol in &config.aol_modes {
            let smote = SmoteConfig {
                target_minority_percent: t,
                aol,
                minority_label: Some(minority_label),
                ..config.smote.clone()
            };
            let (mut table, _) = run_smote(&train, &smote)?;
            check_no_leak(&table, &test_ids)?;
            if !config.rounding.is_empty() {
                table.round_synthetic(&config.rounding);
            }
            let aug = table.to_dataset();
            let pos: Vec<bool> = aug.labels.iter().map(|&l| l == minority_label).collect();
            let scored = fit_and_score(
                &aug.features,
                &pos,
                &test.features,
                &test_pos,
                scaler.as_ref(),
                config.k,
                config.threshold,
            )?;
            rows.push(row_from(Some(t), aol, &pos, table.synthetic.len(), scored));
        }
    }
    Ok(rows)
}

/// Scores an already augmented table: originals are split as in
/// [`run_experiment`], and only synthetic rows descended from training rows
/// are kept.
pub fn evaluate_augmented(table: &AugmentedTable, config: &ExperimentConfig) -> Result<ExperimentRow> {
    let original = &table.original;
    let (train_idx, test_idx) = stratified_split(&original.labels, config.test_fraction, config.seed)?;
    let mut train = original.subset(&train_idx);
    let test = original.subset(&test_idx);
    let train_ids: HashSet<&str> = train.row_ids.iter().map(String::as_str).collect();
    let positive = table.minority_label;

    let scaler = if config.standardize {
        Some(Standardizer::fit(&train.features)?)
    } else {
        None
    };
    let kept: Vec<_> = table
        .synthetic
        .iter()
        .filter(|s| train_ids.contains(s.source_row_id.as_str()))
        .collect();
    let aol = kept.iter().any(|s| s.boosted);
    let synthetic = kept.len();
    for s in kept {
        train.features.push(s.features.clone());
        train.labels.push(positive);
    }
    let train_pos: Vec<bool> = train.labels.iter().map(|&l| l == positive).collect();
    let test_pos: Vec<bool> = test.labels.iter().map(|&l| l == positive).collect();
    let scored = fit_and_score(
        &train.features,
        &train_pos,
        &test.features,
        &test_pos,
        scaler.as_ref(),
        config.k,
        config.threshold,
    )?;
    let target = (synthetic > 0).then(|| table.minority_percent());
    Ok(row_from(target, aol, &train_pos, synthetic, scored))
}

pub const RESULT_HEADER: [&str; 11] = [
    "target_percent",
    "aol",
    "train_rows",
    "synthetic_rows",
    "train_minority_percent",
    "accuracy_train",
    "accuracy_test",
    "f1",
    "pr_auc",
    "roc_auc",
    "note",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_owned(), |x| x.to_string())
}

/// Result table as CSV; undefined metrics are written as `undefined`.
pub fn write_results_to<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(RESULT_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.target_percent
                .map_or_else(|| "baseline".to_owned(), |t| t.to_string()),
            u8::from(r.aol).to_string(),
            r.train_rows.to_string(),
            r.synthetic_rows.to_string(),
            r.train_minority_percent.to_string(),
            r.accuracy_train.to_string(),
            r.accuracy_test.to_string(),
            opt(r.f1),
            opt(r.pr_auc),
            opt(r.roc_auc),
            if r.f1.is_none() || r.pr_auc.is_none() || r.roc_auc.is_none() {
                "test split lacks a class".to_owned()
            } else {
                String::new()
            },
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::demo::{generate, DEMO_CONFIG};
    use crate::data::RUN_SECTIONS;
    use crate::data::{load_csv_reader, DataConfig};

    fn small_demo() -> Dataset {
        let (config, _) = DataConfig::from_run_toml_str(DEMO_CONFIG, &RUN_SECTIONS).unwrap();
        load_csv_reader(generate(400, 40, 5).as_bytes(), &config).unwrap()
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let labels: Vec<u32> = (0..100).map(|i| u32::from(i % 10 == 0)).collect();
        let (train, test) = stratified_split(&labels, 0.2, 3).unwrap();
        assert_eq!(train.len() + test.len(), 100);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 2);
        assert_eq!(test.len(), 20);
        let a: HashSet<_> = train.iter().collect();
        assert!(test.iter().all(|i| !a.contains(i)));
        assert_eq!(stratified_split(&labels, 0.2, 3).unwrap(), (train, test));
        assert!(stratified_split(&labels, 1.0, 3).is_err());
    }

    #[test]
    fn baseline_only_grid() {
        let config = ExperimentConfig {
            targets: vec![],
            seed: 2,
            ..Default::default()
        };
        let rows = run_experiment(&small_demo(), &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].target_percent, None);
        assert_eq!(rows[0].synthetic_rows, 0);
    }

    #[test]
    fn grid_rows_and_determinism() {
        let ds = small_demo();
        let config = ExperimentConfig {
            targets: vec![30.0, 40.0],
            seed: 2,
            ..Default::default()
        };
        let rows = run_experiment(&ds, &config).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows, run_experiment(&ds, &config).unwrap());
        let plain = rows.iter().find(|r| r.target_percent == Some(30.0) && !r.aol).unwrap();
        assert!((plain.train_minority_percent - 30.0).abs() <= 0.2);
        let mut buf = Vec::new();
        write_results_to(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(1).unwrap().starts_with("baseline,0,"));
    }

    #[test]
    fn augmented_table_drops_rows_from_test_sources() {
        let ds = small_demo();
        let smote = SmoteConfig {
            target_minority_percent: 30.0,
            seed: 1,
            ..Default::default()
        };
        let (table, _) = run_smote(&ds, &smote).unwrap();
        let config = ExperimentConfig {
            seed: 2,
            ..Default::default()
        };
        let row = evaluate_augmented(&table, &config).unwrap();
        assert!(row.synthetic_rows < table.synthetic.len());
        assert!(row.synthetic_rows > 0);
    }

    #[test]
    fn undefined_metrics_are_marked() {
        let rows = vec![ExperimentRow {
            target_percent: None,
            aol: false,
            train_rows: 4,
            synthetic_rows: 0,
            train_minority_percent: 25.0,
            accuracy_train: 1.0,
            accuracy_test: 1.0,
            f1: None,
            pr_auc: None,
            roc_auc: None,
        }];
        let mut buf = Vec::new();
        write_results_to(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("undefined,undefined,undefined"));
        assert!(!text.contains(",0,0,0,"));
    }
}
