//! End-to-end oversampling: centroid, target-count arithmetic, per-loop angle
//! increments and assembly of the augmented table.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aol::{boost_outliers, detect_outliers, BoostConfig, BoostSource, OutlierReport};
use crate::data::{AugmentedTable, Dataset};
use crate::error::{Error, Result};
use crate::qdist::{angular_distance_table, Estimator, SwapTestOptions};
use crate::rng;
use crate::synth::{create_syn_data, SynthOptions, SyntheticRecord, DEFAULT_SPLIT_FACTOR};

/// One degree, in radians, as the angle step per synthesis loop.
pub const DEGREE: f64 = 0.0174533;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidScope {
    #[default]
    AllRows,
    MinorityOnly,
}

impl std::str::FromStr for CentroidScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-rows" => Ok(Self::AllRows),
            "minority-only" => Ok(Self::MinorityOnly),
            other => Err(Error::Parameter(format!(
                "unknown centroid scope `{other}` (expected all-rows or minority-only)"
            ))),
        }
    }
}

/// Column-wise mean of `rows`.
pub fn centroid(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Empty("centroid of an empty table".into()))?;
    let mut sum = vec![0.0; first.len()];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != sum.len() {
            return Err(Error::Dimension {
                expected: sum.len(),
                got: row.len(),
            }
            .at_row(i));
        }
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
    }
    let n = rows.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

pub fn dataset_centroid(dataset: &Dataset, scope: CentroidScope, minority_label: u32) -> Result<Vec<f64>> {
    match scope {
        CentroidScope::AllRows => centroid(&dataset.features),
        CentroidScope::MinorityOnly => {
            let rows: Vec<Vec<f64>> = dataset
                .features
                .iter()
                .zip(&dataset.labels)
                .filter(|(_, &l)| l == minority_label)
                .map(|(r, _)| r.clone())
                .collect();
            centroid(&rows)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCounts {
    /// `t/100 · N`, rounded half-up.
    pub target_minority_count: usize,
    pub synthetic: usize,
    pub full_loops: usize,
    pub remainder: usize,
}

/// Synthetic count `S` that brings `m` of `n` rows to `t` percent, with its
/// split into full passes over the minority rows plus a remainder.
pub fn target_counts(n: usize, m: usize, t: f64) -> Result<TargetCounts> {
    if m == 0 || m >= n {
        return Err(Error::Parameter(format!(
            "need 0 < minority count < total, got {m} of {n}"
        )));
    }
    if !(t > 0.0 && t < 100.0) {
        return Err(Error::Parameter(format!(
            "target percent must lie in (0, 100), got {t}"
        )));
    }
    let current = 100.0 * m as f64 / n as f64;
    if t < current {
        return Err(Error::Parameter(format!(
            "target {t}% is below the current minority share {current:.4}%"
        )));
    }
    // percent units keep integer targets exact at the half-way points
    let s = ((t * n as f64 - 100.0 * m as f64) / (100.0 - t) + 0.5).floor().max(0.0) as usize;
    Ok(TargetCounts {
        target_minority_count: (t * n as f64 / 100.0 + 0.5).floor() as usize,
        synthetic: s,
        full_loops: s / m,
        remainder: s % m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    pub target_minority_percent: f64,
    pub split_factor: f64,
    /// Measurement shots per swap test; 0 reads exact probabilities.
    pub shots: u64,
    pub seed: u64,
    /// Restore each synthetic row to its source's norm.
    pub rescale: bool,
    pub estimator: Estimator,
    /// Decimal places for rounding the swap-test states, if any.
    pub prep_rounding: Option<u32>,
    pub centroid_scope: CentroidScope,
    /// Defaults to the least frequent label.
    pub minority_label: Option<u32>,
    /// Run outlier detection and boosting after synthesis.
    pub aol: bool,
    pub num_bins: usize,
    pub boost_angle_multiplier: f64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            target_minority_percent: 30.0,
            split_factor: DEFAULT_SPLIT_FACTOR,
            shots: 0,
            seed: 0,
            rescale: true,
            estimator: Estimator::default(),
            prep_rounding: None,
            centroid_scope: CentroidScope::default(),
            minority_label: None,
            aol: false,
            num_bins: 5,
            boost_angle_multiplier: 1.5,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_factor > 0.0 && self.split_factor.is_finite()) {
            return Err(Error::Parameter(format!(
                "split factor must be positive, got {}",
                self.split_factor
            )));
        }
        if self.num_bins == 0 {
            return Err(Error::Parameter("num_bins must be at least 1".into()));
        }
        if !(self.boost_angle_multiplier >= 0.0 && self.boost_angle_multiplier.is_finite()) {
            return Err(Error::Parameter(format!(
                "boost multiplier must be nonnegative, got {}",
                self.boost_angle_multiplier
            )));
        }
        Ok(())
    }

    fn synth(&self) -> SynthOptions {
        SynthOptions {
            split_factor: self.split_factor,
            rescale: self.rescale,
        }
    }

    fn swap(&self) -> SwapTestOptions {
        SwapTestOptions {
            prep_rounding: self.prep_rounding,
            estimator: self.estimator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub original_total: usize,
    pub minority_count: usize,
    pub minority_label: u32,
    pub target_percent: f64,
    pub target_minority_count: usize,
    pub synthetic_generated: usize,
    /// Minority share after synthesis, before any boosting.
    pub achieved_percent: f64,
    pub loop_iterations: usize,
    pub remainder_records: usize,
    pub boosted_generated: usize,
    /// Minority share of the final table.
    pub final_percent: f64,
    pub outliers_low: usize,
    pub outliers_high: usize,
}

/// Synthesizes minority rows until the minority share reaches the configured
/// target, then optionally boosts sparse angular-outlier bins.
///
/// Loop `k` (1-based) rotates every minority row with increment `k·DEGREE`;
/// the final partial loop takes a seeded sample of the rows. The sample order
/// does not depend on its size, so a larger target produces a superset of the
/// records of a smaller one.
pub fn run_smote(dataset: &Dataset, config: &SmoteConfig) -> Result<(AugmentedTable, AugmentationReport)> {
    let (table, report, _) = run_smote_detailed(dataset, config)?;
    Ok((table, report))
}

/// As [`run_smote`], also returning the outlier report when boosting ran.
pub fn run_smote_detailed(
    dataset: &Dataset,
    config: &SmoteConfig,
) -> Result<(AugmentedTable, AugmentationReport, Option<OutlierReport>)> {
    config.validate()?;
    let minority_label = match config.minority_label {
        Some(l) => l,
        None => dataset
            .minority_label()
            .ok_or_else(|| Error::Empty("dataset has no rows".into()))?,
    };
    let minority: Vec<usize> = (0..dataset.len())
        .filter(|&i| dataset.labels[i] == minority_label)
        .collect();
    let n = dataset.len();
    let m = minority.len();
    let counts = target_counts(n, m, config.target_minority_percent)?;

    let center = dataset_centroid(dataset, config.centroid_scope, minority_label)?;
    let points: Vec<Vec<f64>> = minority.iter().map(|&i| dataset.features[i].clone()).collect();
    let distances = angular_distance_table(&points, &center, config.shots, config.seed, config.swap())
        .map_err(|e| remap_row(e, &minority))?;

    let mut jobs: Vec<(usize, usize)> = Vec::with_capacity(counts.synthetic);
    for k in 1..=counts.full_loops {
        jobs.extend((0..m).map(|j| (k, j)));
    }
    if counts.remainder > 0 {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng::stream(config.seed, &[rng::TAG_REMAINDER]));
        let k = counts.full_loops + 1;
        jobs.extend(order[..counts.remainder].iter().map(|&j| (k, j)));
    }

    let synth = config.synth();
    let mut synthetic: Vec<SyntheticRecord> = jobs
        .par_iter()
        .map(|&(k, j)| {
            let row = minority[j];
            let mut rng = rng::stream(config.seed, &[rng::TAG_SYNTH, k as u64, row as u64]);
            create_syn_data(
                &dataset.features[row],
                &dataset.row_ids[row],
                distances[j],
                k as f64 * DEGREE,
                synth,
                &mut rng,
            )
            .map_err(|e| e.at_row(row))
        })
        .collect::<Result<_>>()?;

    let generated = synthetic.len();
    let achieved_percent = 100.0 * (m + generated) as f64 / (n + generated) as f64;

    let mut outliers = None;
    let mut boosted = Vec::new();
    if config.aol {
        let (report, records) = boost_combined(dataset, &minority, &distances, &synthetic, config)?;
        boosted = records;
        outliers = Some(report);
    }
    let boosted_generated = boosted.len();
    synthetic.extend(boosted);

    let mut original_angular = vec![None; n];
    for (&row, &d) in minority.iter().zip(&distances) {
        original_angular[row] = Some(d);
    }
    let table = AugmentedTable {
        original: dataset.clone(),
        original_angular,
        minority_label,
        synthetic,
    };
    let report = AugmentationReport {
        original_total: n,
        minority_count: m,
        minority_label,
        target_percent: config.target_minority_percent,
        target_minority_count: counts.target_minority_count,
        synthetic_generated: generated,
        achieved_percent,
        loop_iterations: counts.full_loops,
        remainder_records: counts.remainder,
        boosted_generated,
        final_percent: table.minority_percent(),
        outliers_low: outliers.as_ref().map_or(0, |r| r.low.total()),
        outliers_high: outliers.as_ref().map_or(0, |r| r.high.total()),
    };
    Ok((table, report, outliers))
}

/// Detects outliers over original minority rows followed by synthetic rows
/// and boosts both sides.
fn boost_combined(
    dataset: &Dataset,
    minority: &[usize],
    distances: &[f64],
    synthetic: &[SyntheticRecord],
    config: &SmoteConfig,
) -> Result<(OutlierReport, Vec<SyntheticRecord>)> {
    let mut sources: Vec<BoostSource> = minority
        .iter()
        .zip(distances)
        .map(|(&row, &d)| BoostSource {
            features: &dataset.features[row],
            source_row_id: &dataset.row_ids[row],
            angular_distance: d,
        })
        .collect();
    sources.extend(synthetic.iter().map(|s| BoostSource {
        features: &s.features,
        source_row_id: &s.source_row_id,
        angular_distance: s.angular_distance,
    }));
    let values: Vec<f64> = sources.iter().map(|s| s.angular_distance).collect();
    let report = detect_outliers(&values, config.num_bins)?;
    let boost = BoostConfig {
        num_bins: config.num_bins,
        angle_multiplier: config.boost_angle_multiplier,
        synth: config.synth(),
        seed: config.seed,
    };
    let mut records = boost_outliers(&report.low, &sources, &boost)?;
    records.extend(boost_outliers(&report.high, &sources, &boost)?);
    Ok((report, records))
}

/// Maps a row index within the minority subset back to the dataset row.
fn remap_row(e: Error, minority: &[usize]) -> Error {
    match e {
        Error::Row { row, source } if row < minority.len() => Error::Row {
            row: minority[row],
            source,
        },
        other => other,
    }
}
