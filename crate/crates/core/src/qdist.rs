//! Compact swap test between a reference vector (the data centroid) and a
//! data point, and the angular distance derived from it.
//!
//! The circuit uses one control qubit, one qubit holding the two-amplitude
//! norm state `phi`, and `log2(len(psi))` qubits holding the interleaved
//! state `psi`. An X flips the first `psi` qubit, then H, CSWAP(control, phi,
//! first psi qubit), H, and the control is measured.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::statevec::{Gate, MeasurementOutcome, StateVector};

/// How the overlap probability is read off the control-qubit statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// `p0 - p1`, clamped to [0, 1].
    #[default]
    Standard,
    /// `1 - 2*p0 + p1`, clamped to [0, 1]. Kept for comparison with the
    /// original pseudocode; it is negative for most inputs.
    PaperLiteral,
}

impl Estimator {
    pub fn overlap(self, outcome: &MeasurementOutcome) -> f64 {
        let raw = match self {
            Estimator::Standard => outcome.p0 - outcome.p1,
            Estimator::PaperLiteral => 1.0 - 2.0 * outcome.p0 + outcome.p1,
        };
        raw.clamp(0.0, 1.0)
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Estimator::Standard),
            "paper-literal" => Ok(Estimator::PaperLiteral),
            other => Err(Error::Parameter(format!(
                "unknown estimator `{other}` (expected standard or paper-literal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwapTestOptions {
    /// Round `phi`, `psi` to this many decimals and `z` to an integer, as the
    /// original preparation routine does. `None` keeps full precision.
    pub prep_rounding: Option<u32>,
    pub estimator: Estimator,
}

/// Register contents for the compact swap test.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapTestStates {
    pub phi: [f64; 2],
    pub psi: Vec<f64>,
    pub z: f64,
    pub dc_norm: f64,
    pub md_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapTestResult {
    pub overlap_probability: f64,
    /// Radians, in [0, π].
    pub angular_distance: f64,
    pub euclid_dissimilarity: f64,
    pub outcome: MeasurementOutcome,
}

fn round_to(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Prepares `phi` and `psi` for a reference vector `point_a` and a data
/// point `point_b` of equal (power-of-two) length.
pub fn prep_swap_test(point_a: &[f64], point_b: &[f64], rounding: Option<u32>) -> Result<SwapTestStates> {
    if point_a.len() != point_b.len() {
        return Err(Error::Dimension {
            expected: point_a.len(),
            got: point_b.len(),
        });
    }
    if point_a.is_empty() {
        return Err(Error::DegenerateInput("empty vectors".into()));
    }
    if point_a.iter().chain(point_b).any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("non-finite component".into()));
    }
    let dc_norm = norm(point_a);
    let md_norm = norm(point_b);
    if dc_norm == 0.0 || md_norm == 0.0 {
        return Err(Error::DegenerateInput("zero-norm vector in swap test".into()));
    }

    let round = |x: f64| rounding.map_or(x, |d| round_to(x, d));
    let mut z = dc_norm * dc_norm + md_norm * md_norm;
    if rounding.is_some() {
        z = z.round().max(f64::MIN_POSITIVE);
    }
    let sqrt_z = z.sqrt();
    let phi = [round(dc_norm / sqrt_z), -round(md_norm / sqrt_z)];

    let sqrt2 = std::f64::consts::SQRT_2;
    let psi = point_a
        .iter()
        .zip(point_b)
        .flat_map(|(&a, &b)| [round(a / (dc_norm * sqrt2)), round(b / (md_norm * sqrt2))])
        .collect();

    Ok(SwapTestStates {
        phi,
        psi,
        z,
        dc_norm,
        md_norm,
    })
}

fn psi_qubits(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Dimension {
            expected: len.next_power_of_two().max(2),
            got: len,
        });
    }
    Ok(len.trailing_zeros() as usize)
}

/// Runs the compact swap-test circuit. `shots == 0` reads exact probabilities.
pub fn swap_test(states: &SwapTestStates, shots: u64, seed: u64, estimator: Estimator) -> Result<SwapTestResult> {
    let psi_q = psi_qubits(states.psi.len())?;
    let control = StateVector::zero(1)?;
    let phi = StateVector::from_real(&states.phi, 1)?;
    let psi = StateVector::from_real(&states.psi, psi_q)?;
    let initial = control.tensor(&phi)?.tensor(&psi)?;

    let (ctrl, phi_q, psi_first) = (0, 1, 2);
    let final_state = initial.apply_circuit(&[
        Gate::X(psi_first),
        Gate::H(ctrl),
        Gate::Cswap {
            control: ctrl,
            a: phi_q,
            b: psi_first,
        },
        Gate::H(ctrl),
    ])?;
    let outcome = final_state.measure_qubit(ctrl, shots, seed)?;
    let overlap_probability = estimator.overlap(&outcome);
    Ok(SwapTestResult {
        overlap_probability,
        angular_distance: angular_distance(overlap_probability),
        euclid_dissimilarity: (2.0 * states.z * overlap_probability).sqrt(),
        outcome,
    })
}

/// `2·arccos(√p)`; `p` is clamped to [0, 1] first.
pub fn angular_distance(overlap_probability: f64) -> f64 {
    2.0 * overlap_probability.clamp(0.0, 1.0).sqrt().acos()
}

/// Zero-pads `v` to `len`.
pub fn pad_to(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len.max(v.len()), 0.0);
    out
}

/// Angular distance between `point` and `reference` after padding both to
/// the next power of two.
pub fn calculate_angle(
    point: &[f64],
    reference: &[f64],
    shots: u64,
    seed: u64,
    options: SwapTestOptions,
) -> Result<SwapTestResult> {
    if point.len() != reference.len() {
        return Err(Error::Dimension {
            expected: reference.len(),
            got: point.len(),
        });
    }
    let padded = point.len().next_power_of_two();
    let states = prep_swap_test(
        &pad_to(reference, padded),
        &pad_to(point, padded),
        options.prep_rounding,
    )?;
    swap_test(&states, shots, seed, options.estimator)
}

/// One angular distance per row against `centroid`. Row `i` measures with a
/// stream derived from `(seed, i)`, so the result does not depend on how rows
/// are scheduled.
pub fn angular_distance_table(
    points: &[Vec<f64>],
    centroid: &[f64],
    shots: u64,
    seed: u64,
    options: SwapTestOptions,
) -> Result<Vec<f64>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let row_seed = rng::derive_seed(seed, &[rng::TAG_SWAP_TEST, i as u64]);
            calculate_angle(row, centroid, shots, row_seed, options)
                .map(|r| r.angular_distance)
                .map_err(|e| e.at_row(i))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// Control-qubit p0 from the reduced density matrix of the first psi
    /// qubit: p0 = (1 + ⟨φ|ρ'|φ⟩) / 2, where ρ' is that qubit's reduced state
    /// after the X flip. Uses no simulator code.
    pub(crate) fn reduced_density_p0(states: &SwapTestStates) -> f64 {
        let half = states.psi.len() / 2;
        let (lo, hi) = states.psi.split_at(half);
        let r00: f64 = lo.iter().map(|x| x * x).sum();
        let r11: f64 = hi.iter().map(|x| x * x).sum();
        let r01: f64 = lo.iter().zip(hi).map(|(a, b)| a * b).sum();
        let total = r00 + r11;
        // X swaps the roles of |0⟩ and |1⟩
        let (f00, f11, f01) = (r11 / total, r00 / total, r01 / total);
        let phi_norm = states.phi[0].powi(2) + states.phi[1].powi(2);
        let (p0, p1) = (states.phi[0], states.phi[1]);
        let expect = (p0 * p0 * f00 + p1 * p1 * f11 + 2.0 * p0 * p1 * f01) / phi_norm;
        0.5 * (1.0 + expect)
    }

    #[test]
    fn prep_unit_vectors() {
        let s = prep_swap_test(&[1.0, 0.0], &[1.0, 0.0], None).unwrap();
        assert_abs_diff_eq!(s.phi[0], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi[1], -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(s.z, 2.0);
        // psi[2i] = a_i/(|a|√2), psi[2i+1] = b_i/(|b|√2)
        let expected = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0];
        for (got, want) in s.psi.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn prep_equal_norms_give_symmetric_phi() {
        let s = prep_swap_test(&[3.0, 4.0], &[3.0, 4.0], None).unwrap();
        assert_eq!(s.dc_norm, 5.0);
        assert_eq!(s.md_norm, 5.0);
        assert_abs_diff_eq!(s.phi[0], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi[1], -FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn prep_errors() {
        assert!(matches!(
            prep_swap_test(&[1.0, 0.0], &[0.0, 0.0], None),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            prep_swap_test(&[1.0, 0.0], &[1.0], None),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn prep_rounding_matches_literal_routine() {
        let s = prep_swap_test(&[1.0, 2.0], &[2.0, 1.0], Some(3)).unwrap();
        assert_eq!(s.z, 10.0);
        assert_eq!(s.phi, [0.707, -0.707]);
        assert_eq!(s.psi, vec![0.316, 0.632, 0.632, 0.316]);
    }

    #[test]
    fn swap_test_identical_unit_vectors_exact() {
        let s = prep_swap_test(&[1.0, 0.0], &[1.0, 0.0], None).unwrap();
        let r = swap_test(&s, 0, 0, Estimator::Standard).unwrap();
        assert_abs_diff_eq!(r.outcome.p0, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(r.overlap_probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.angular_distance, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.euclid_dissimilarity.powi(2), 2.0 * s.z * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn swap_test_sampled_close_to_exact() {
        let s = prep_swap_test(&[1.0, 0.0], &[1.0, 0.0], None).unwrap();
        let r = swap_test(&s, 10_000, 2024, Estimator::Standard).unwrap();
        assert!((r.overlap_probability - 0.5).abs() <= 0.03);
        assert_eq!(r.outcome.shots, 10_000);
    }

    #[test]
    fn paper_literal_estimator_clamps_negative_to_zero() {
        let s = prep_swap_test(&[1.0, 0.0], &[1.0, 0.0], None).unwrap();
        let r = swap_test(&s, 0, 0, Estimator::PaperLiteral).unwrap();
        // 1 - 2(0.75) + 0.25 = -0.25
        assert_eq!(r.overlap_probability, 0.0);
        assert_eq!(r.angular_distance, PI);
    }

    #[test]
    fn angular_distance_closed_form() {
        assert_eq!(angular_distance(1.0), 0.0);
        assert_eq!(angular_distance(0.0), PI);
        assert_abs_diff_eq!(angular_distance(0.25), 2.0 * PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(angular_distance(0.5), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn table_edge_cases() {
        let centroid = vec![1.0, 0.0];
        let t = angular_distance_table(std::slice::from_ref(&centroid), &centroid, 0, 0, Default::default()).unwrap();
        assert_abs_diff_eq!(t[0], PI / 2.0, epsilon = 1e-12);
        assert!(angular_distance_table(&[], &centroid, 0, 0, Default::default())
            .unwrap()
            .is_empty());

        let rows = vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.1, 4.0], vec![2.0, 2.0, 0.0]];
        let c = vec![1.0, 1.0, 1.0];
        let a = angular_distance_table(&rows, &c, 0, 1, Default::default()).unwrap();
        let b = angular_distance_table(&rows, &c, 0, 1, Default::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_reports_degenerate_row() {
        let rows = vec![vec![1.0, 2.0], vec![0.0, 0.0]];
        let err = angular_distance_table(&rows, &[1.0, 1.0], 0, 0, Default::default()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }), "{err}");
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=32)
            .prop_flat_map(|d| {
                (
                    prop::collection::vec(-5.0f64..5.0, d),
                    prop::collection::vec(-5.0f64..5.0, d),
                )
            })
            .prop_filter("nonzero", |(a, b)| norm(a) > 1e-6 && norm(b) > 1e-6)
    }

    proptest! {
        #[test]
        fn circuit_matches_reduced_density_formula((a, b) in arb_pair()) {
            let n = a.len().next_power_of_two();
            let s = prep_swap_test(&pad_to(&a, n), &pad_to(&b, n), None).unwrap();
            let r = swap_test(&s, 0, 0, Estimator::Standard).unwrap();
            prop_assert!((r.outcome.p0 - reduced_density_p0(&s)).abs() <= 1e-9);
        }

        #[test]
        fn direction_is_scale_invariant((a, b) in arb_pair(), k in 0.01f64..100.0) {
            let n = a.len().next_power_of_two();
            let s1 = prep_swap_test(&pad_to(&a, n), &pad_to(&b, n), None).unwrap();
            let ka: Vec<f64> = a.iter().map(|x| x * k).collect();
            let kb: Vec<f64> = b.iter().map(|x| x * k).collect();
            let s2 = prep_swap_test(&pad_to(&ka, n), &pad_to(&kb, n), None).unwrap();
            for (x, y) in s1.psi.iter().zip(&s2.psi) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
            prop_assert!((s1.phi[0] - s2.phi[0]).abs() <= 1e-9);
            prop_assert!((s1.phi[1] - s2.phi[1]).abs() <= 1e-9);
            let p1 = swap_test(&s1, 0, 0, Estimator::Standard).unwrap().overlap_probability;
            let p2 = swap_test(&s2, 0, 0, Estimator::Standard).unwrap().overlap_probability;
            prop_assert!((p1 - p2).abs() <= 1e-9);
        }

        #[test]
        fn angular_distance_monotone(p in 0.0f64..1.0, q in 0.0f64..1.0) {
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(angular_distance(hi) <= angular_distance(lo));
        }
    }
}
