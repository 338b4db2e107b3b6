//! Angular outliers: rows whose angular distance lies beyond the
//! interquartile fences of the minority distribution, and boosting of the
//! sparsely populated outlier bins.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pipeline::DEGREE;
use crate::rng;
use crate::synth::{create_syn_data, SynthOptions, SyntheticRecord};

/// Linear-interpolation quantile of an ascending slice at position
/// `q·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// `bins + 1` equal-width edges spanning [min, max] of `values`; a constant
/// sample is widened to [v − 0.5, v + 0.5].
pub fn histogram_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

/// Bin of `v` under `edges`; the last bin is closed on the right.
pub fn histogram_bin(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let idx = ((v - lo) / (hi - lo) * bins as f64).floor();
    let mut idx = idx.clamp(0.0, (bins - 1) as f64) as usize;
    // floating error in the division can land one bin off near an edge
    if idx > 0 && v < edges[idx] {
        idx -= 1;
    } else if idx + 1 < bins && v >= edges[idx + 1] {
        idx += 1;
    }
    idx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierBounds {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl OutlierBounds {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("no angular distances to fence".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&sorted, 0.25);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        Ok(Self {
            q1,
            q3,
            iqr,
            lower_bound: q1 - 1.5 * iqr,
            upper_bound: q3 + 1.5 * iqr,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierBin {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Indices into the value slice given to [`detect_outliers`].
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierBinTable {
    pub side: Side,
    pub num_bins: usize,
    /// Empty when the side has no outliers.
    pub bins: Vec<OutlierBin>,
}

impl OutlierBinTable {
    fn build(side: Side, values: &[f64], members: Vec<usize>, num_bins: usize) -> Self {
        if members.is_empty() {
            return Self {
                side,
                num_bins,
                bins: Vec::new(),
            };
        }
        let subset: Vec<f64> = members.iter().map(|&i| values[i]).collect();
        let edges = histogram_edges(&subset, num_bins);
        let mut bins: Vec<OutlierBin> = edges
            .windows(2)
            .map(|w| OutlierBin {
                start: w[0],
                end: w[1],
                count: 0,
                members: Vec::new(),
            })
            .collect();
        for (&idx, &v) in members.iter().zip(&subset) {
            let b = &mut bins[histogram_bin(&edges, v)];
            b.count += 1;
            b.members.push(idx);
        }
        Self { side, num_bins, bins }
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub bounds: OutlierBounds,
    pub low: OutlierBinTable,
    pub high: OutlierBinTable,
}

/// Fences `angular_distances` at Q1 − 1.5·IQR and Q3 + 1.5·IQR and bins the
/// points strictly outside each fence into `num_bins` equal-width bins.
pub fn detect_outliers(angular_distances: &[f64], num_bins: usize) -> Result<OutlierReport> {
    if num_bins == 0 {
        return Err(Error::Parameter("num_bins must be at least 1".into()));
    }
    if angular_distances.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite angular distance".into()));
    }
    let bounds = OutlierBounds::from_values(angular_distances)?;
    let mut low = Vec::new();
    let mut high = Vec::new();
    for (i, &v) in angular_distances.iter().enumerate() {
        if v < bounds.lower_bound {
            low.push(i);
        } else if v > bounds.upper_bound {
            high.push(i);
        }
    }
    Ok(OutlierReport {
        bounds,
        low: OutlierBinTable::build(Side::Low, angular_distances, low, num_bins),
        high: OutlierBinTable::build(Side::High, angular_distances, high, num_bins),
    })
}

/// A row eligible to seed boosted records.
#[derive(Debug, Clone, Copy)]
pub struct BoostSource<'a> {
    pub features: &'a [f64],
    pub source_row_id: &'a str,
    pub angular_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    /// Bin count used for the threshold (normally the detection bin count).
    pub num_bins: usize,
    /// Scale applied to the loop-count increment; 1.5 by default.
    pub angle_multiplier: f64,
    pub synth: SynthOptions,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            num_bins: 5,
            angle_multiplier: 1.5,
            synth: SynthOptions::default(),
            seed: 0,
        }
    }
}

/// Per-bin arithmetic of a boosting pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoostPlan {
    pub threshold: usize,
    pub half_threshold: usize,
}

impl BoostPlan {
    pub fn new(total_outliers: usize, num_bins: usize) -> Self {
        let threshold = (total_outliers as f64 / num_bins as f64).round() as usize;
        let half_threshold = (threshold as f64 / 2.0).round() as usize;
        Self {
            threshold,
            half_threshold,
        }
    }

    /// Records to generate per source in a bin holding `count` rows; zero
    /// when the bin is empty or not under-populated.
    pub fn loops_for(&self, count: usize) -> usize {
        if count == 0 || count >= self.half_threshold {
            0
        } else {
            self.threshold / count
        }
    }
}

/// Generates boosted records for every under-populated bin of `table`.
///
/// Each source in a bin with `0 < count < half_threshold` yields
/// `⌊threshold / count⌋` records; record `j` uses the increment
/// `itr · 1° · multiplier + j` radians.
pub fn boost_outliers(
    table: &OutlierBinTable,
    sources: &[BoostSource<'_>],
    config: &BoostConfig,
) -> Result<Vec<SyntheticRecord>> {
    if table.is_empty() {
        return Ok(Vec::new());
    }
    if config.num_bins == 0 {
        return Err(Error::Parameter("num_bins must be at least 1".into()));
    }
    let plan = BoostPlan::new(table.total(), config.num_bins);
    let side_tag = match table.side {
        Side::Low => 0u64,
        Side::High => 1,
    };

    let mut jobs = Vec::new();
    for (b, bin) in table.bins.iter().enumerate() {
        let itr = plan.loops_for(bin.count);
        for &member in &bin.members {
            for j in 0..itr {
                jobs.push((b, member, itr, j));
            }
        }
    }

    jobs.par_iter()
        .map(|&(b, member, itr, j)| {
            let src = sources.get(member).ok_or(Error::Dimension {
                expected: member + 1,
                got: sources.len(),
            })?;
            let increment = (itr as f64 * DEGREE) * config.angle_multiplier + j as f64;
            let mut rng = rng::stream(
                config.seed,
                &[rng::TAG_BOOST, side_tag, b as u64, member as u64, j as u64],
            );
            let mut rec = create_syn_data(
                src.features,
                src.source_row_id,
                src.angular_distance,
                increment,
                config.synth,
                &mut rng,
            )
            .map_err(|e| e.at_row(member))?;
            rec.boosted = true;
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn twelve() -> Vec<f64> {
        let mut v: Vec<f64> = (0..=10).map(f64::from).collect();
        v.push(100.0);
        v
    }

    /// Textbook percentile by explicit rank arithmetic, independent of
    /// `quantile_sorted`.
    fn oracle_bounds(values: &[f64]) -> (f64, f64) {
        let mut s = values.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pct = |p: f64| {
            let rank = p * (s.len() as f64 - 1.0);
            let below = rank as usize;
            if below + 1 >= s.len() {
                s[s.len() - 1]
            } else {
                s[below] * (1.0 - (rank - below as f64)) + s[below + 1] * (rank - below as f64)
            }
        };
        let (q1, q3) = (pct(0.25), pct(0.75));
        (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1))
    }

    #[test]
    fn worked_example() {
        let r = detect_outliers(&twelve(), 2).unwrap();
        assert_eq!(r.bounds.q1, 2.75);
        assert_eq!(r.bounds.q3, 8.25);
        assert_eq!(r.bounds.iqr, 5.5);
        assert_eq!(r.bounds.upper_bound, 16.5);
        assert_eq!(r.bounds.lower_bound, -5.5);
        assert!(r.low.is_empty());
        assert_eq!(r.high.total(), 1);
        assert_eq!(r.high.bins.len(), 2);
        let member: Vec<usize> = r.high.bins.iter().flat_map(|b| b.members.clone()).collect();
        assert_eq!(member, vec![11]);
    }

    #[test]
    fn constant_vector_has_no_outliers() {
        let r = detect_outliers(&[0.7; 10], 3).unwrap();
        assert_eq!(r.bounds.iqr, 0.0);
        assert_eq!(r.bounds.lower_bound, 0.7);
        assert_eq!(r.bounds.upper_bound, 0.7);
        assert!(r.low.is_empty() && r.high.is_empty());
    }

    #[test]
    fn planted_extremes_on_both_sides() {
        let mut v: Vec<f64> = (0..20).map(|i| 10.0 + (i as f64 - 9.5) * 0.1).collect();
        let (lo, hi) = oracle_bounds(&v);
        v.push(lo - 5.0);
        v.push(hi + 5.0);
        let r = detect_outliers(&v, 4).unwrap();
        assert_eq!(r.low.total(), 1);
        assert_eq!(r.high.total(), 1);
    }

    #[test]
    fn detect_rejects_bad_input() {
        assert!(matches!(detect_outliers(&[], 2), Err(Error::Empty(_))));
        assert!(matches!(detect_outliers(&[1.0], 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn histogram_bins_close_last_edge() {
        let edges = histogram_edges(&[0.0, 1.0], 4);
        assert_eq!(edges, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(histogram_bin(&edges, 1.0), 3);
        assert_eq!(histogram_bin(&edges, 0.0), 0);
        assert_eq!(histogram_bin(&edges, 0.25), 1);
        assert_eq!(histogram_bin(&edges, 0.2499), 0);
    }

    #[test]
    fn boost_plan_arithmetic() {
        let plan = BoostPlan::new(20, 5);
        assert_eq!(plan.threshold, 4);
        assert_eq!(plan.half_threshold, 2);
        assert_eq!(plan.loops_for(1), 4);
        assert_eq!(plan.loops_for(3), 0);
        assert_eq!(plan.loops_for(2), 0);
        assert_eq!(plan.loops_for(0), 0);
    }

    fn table_with_counts(counts: &[usize]) -> (OutlierBinTable, Vec<Vec<f64>>) {
        let mut bins = Vec::new();
        let mut features = Vec::new();
        for (b, &c) in counts.iter().enumerate() {
            let members: Vec<usize> = (features.len()..features.len() + c).collect();
            for m in &members {
                features.push(vec![1.0 + *m as f64, 2.0, 0.5 * b as f64 + 0.1, 3.0]);
            }
            bins.push(OutlierBin {
                start: b as f64,
                end: b as f64 + 1.0,
                count: c,
                members,
            });
        }
        (
            OutlierBinTable {
                side: Side::High,
                num_bins: counts.len(),
                bins,
            },
            features,
        )
    }

    #[test]
    fn boost_generates_threshold_multiples() {
        // total 20 over 5 bins: threshold 4, half 2; only the count-1 bin boosts
        let (table, features) = table_with_counts(&[1, 3, 4, 6, 6]);
        let ids: Vec<String> = (0..features.len()).map(|i| format!("r{i}")).collect();
        let sources: Vec<BoostSource> = features
            .iter()
            .zip(&ids)
            .map(|(f, id)| BoostSource {
                features: f,
                source_row_id: id,
                angular_distance: 1.9,
            })
            .collect();
        let config = BoostConfig {
            num_bins: 5,
            seed: 11,
            ..Default::default()
        };
        let out = boost_outliers(&table, &sources, &config).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|r| r.boosted && r.synthetic && r.source_row_id == "r0"));
        for (i, a) in out.iter().enumerate() {
            assert_ne!(a.features, features[0]);
            for b in &out[i + 1..] {
                assert_ne!(a.features, b.features);
            }
        }
        let again = boost_outliers(&table, &sources, &config).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn boost_empty_table() {
        let table = OutlierBinTable {
            side: Side::Low,
            num_bins: 3,
            bins: Vec::new(),
        };
        assert!(boost_outliers(&table, &[], &BoostConfig::default()).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn membership_matches_oracle(v in prop::collection::vec(-3.0f64..3.0, 1..60), extra in prop::collection::vec(-40.0f64..40.0, 0..4)) {
            let mut values = v;
            values.extend(extra);
            let r = detect_outliers(&values, 3).unwrap();
            let (lo, hi) = oracle_bounds(&values);
            let mut got_low: Vec<usize> = r.low.bins.iter().flat_map(|b| b.members.clone()).collect();
            let mut got_high: Vec<usize> = r.high.bins.iter().flat_map(|b| b.members.clone()).collect();
            got_low.sort();
            got_high.sort();
            let want_low: Vec<usize> = (0..values.len()).filter(|&i| values[i] < lo).collect();
            let want_high: Vec<usize> = (0..values.len()).filter(|&i| values[i] > hi).collect();
            prop_assert_eq!(got_low, want_low);
            prop_assert_eq!(got_high, want_high);
            for t in [&r.low, &r.high] {
                for w in t.bins.windows(2) {
                    prop_assert_eq!(w[0].end, w[1].start);
                }
                for bin in &t.bins {
                    prop_assert_eq!(bin.count, bin.members.len());
                }
            }
        }
    }
}
