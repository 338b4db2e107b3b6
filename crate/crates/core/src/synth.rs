//! Synthetic point generation by small X rotations of an amplitude-encoded
//! data point.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qdist::pad_to;
use crate::statevec::{Gate, StateVector};

/// Default divisor applied to the drawn rotation angle.
pub const DEFAULT_SPLIT_FACTOR: f64 = 10.0;

/// Provenance-carrying synthetic row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub features: Vec<f64>,
    /// Row id of the original minority row this record descends from.
    pub source_row_id: String,
    /// Total RX angle applied, in radians, reduced to [0, 2π).
    pub rotation_angle: f64,
    /// Angular distance of the source row from the centroid.
    pub angular_distance: f64,
    pub boosted: bool,
    pub synthetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPlan {
    pub base_angle: f64,
    pub angle_increment: f64,
    pub split_factor: f64,
}

impl RotationPlan {
    /// Sum of base angle and increment, reduced modulo 2π.
    pub fn final_angle(&self) -> f64 {
        (self.base_angle + self.angle_increment).rem_euclid(TAU)
    }
}

/// Draws the base rotation angle for a point at `angular_distance` radians
/// from the centroid.
///
/// * beyond π/2: `|π/2 − d| / sf`
/// * negative: `|(π/2 − d)·u| / sf` with `u ~ U(0.5, 1)`
/// * otherwise: `U(0, d) / sf`
pub fn rotation_angle<R: Rng + ?Sized>(angular_distance: f64, split_factor: f64, rng: &mut R) -> Result<f64> {
    if !split_factor.is_finite() || split_factor <= 0.0 {
        return Err(Error::Parameter(format!(
            "split factor must be positive, got {split_factor}"
        )));
    }
    if !angular_distance.is_finite() {
        return Err(Error::Parameter(format!(
            "angular distance must be finite, got {angular_distance}"
        )));
    }
    let d = angular_distance;
    let angle = if d > FRAC_PI_2 {
        (FRAC_PI_2 - d).abs() / split_factor
    } else if d < 0.0 {
        let u = rng.random_range(0.5..1.0);
        ((FRAC_PI_2 - d) * u).abs() / split_factor
    } else {
        rng.random::<f64>() * d / split_factor
    };
    Ok(angle)
}

/// Number of qubits used to encode a vector of `len` features.
pub fn qubits_for(len: usize) -> usize {
    len.next_power_of_two().max(2).trailing_zeros() as usize
}

/// Pre-real-part state of `point` rotated by `theta` on every qubit.
pub fn rotated_state(point: &[f64], theta: f64) -> Result<StateVector> {
    let n = qubits_for(point.len());
    let padded = pad_to(point, 1 << n);
    let gates: Vec<Gate> = (0..n).map(|q| Gate::Rx(q, theta)).collect();
    StateVector::from_real(&padded, n)?.apply_circuit(&gates)
}

/// Rotates `point` by `theta` on every qubit and maps it back to a real
/// vector of the original length.
///
/// With `rescale`, the real part (padding stripped) is renormalized and
/// multiplied by the input norm so the output lives on the data's scale.
/// Without it the raw real part is returned, padding stripped.
pub fn rotate_point(point: &[f64], theta: f64, rescale: bool) -> Result<Vec<f64>> {
    let input_norm = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    if input_norm == 0.0 {
        return Err(Error::DegenerateInput("cannot rotate a zero vector".into()));
    }
    if rescale && theta == 0.0 {
        return Ok(point.to_vec());
    }
    let state = rotated_state(point, theta)?;
    let mut real = state.real_parts();
    real.truncate(point.len());
    if !rescale {
        return Ok(real);
    }
    let real_norm = real.iter().map(|x| x * x).sum::<f64>().sqrt();
    if real_norm <= 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "rotation by {theta} rad leaves no real component to rescale"
        )));
    }
    let scale = input_norm / real_norm;
    Ok(real.into_iter().map(|x| x * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub split_factor: f64,
    pub rescale: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            split_factor: DEFAULT_SPLIT_FACTOR,
            rescale: true,
        }
    }
}

/// Generates one synthetic record from `point`.
pub fn create_syn_data<R: Rng + ?Sized>(
    point: &[f64],
    source_row_id: &str,
    angular_distance: f64,
    angle_increment: f64,
    options: SynthOptions,
    rng: &mut R,
) -> Result<SyntheticRecord> {
    if angle_increment.is_nan() || angle_increment < 0.0 {
        return Err(Error::Parameter(format!(
            "angle increment must be nonnegative, got {angle_increment}"
        )));
    }
    let plan = RotationPlan {
        base_angle: rotation_angle(angular_distance, options.split_factor, rng)?,
        angle_increment,
        split_factor: options.split_factor,
    };
    let theta = plan.final_angle();
    let features = rotate_point(point, theta, options.rescale)?;
    Ok(SyntheticRecord {
        features,
        source_row_id: source_row_id.to_owned(),
        rotation_angle: theta,
        angular_distance,
        boosted: false,
        synthetic: true,
    })
}
