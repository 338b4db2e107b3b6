//! Dense statevector simulation for the handful of gates the oversampler needs.
//!
//! Qubit ordering is big-endian: qubit 0 is the most significant bit of the
//! basis-state index, so a register declared first occupies the high bits.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng;

/// Largest register we are willing to allocate densely.
pub const MAX_QUBITS: usize = 26;

/// Shot count used when a caller asks for sampling without choosing one.
pub const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    /// Rotation about X by an angle in radians.
    Rx(usize, f64),
    /// Swap qubits `a` and `b` when `control` is |1⟩.
    Cswap {
        control: usize,
        a: usize,
        b: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

/// Outcome statistics for a single-qubit measurement.
///
/// `shots == 0` means the probabilities are exact and both counts are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub p0: f64,
    pub p1: f64,
    pub shots: u64,
    pub counts0: u64,
    pub counts1: u64,
}

impl MeasurementOutcome {
    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }
}

impl StateVector {
    /// Builds a normalized state from complex amplitudes.
    pub fn initialize(amplitudes: &[Complex64], num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Parameter(format!(
                "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::DegenerateInput("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(Error::DegenerateInput("zero vector has no direction".into()));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok(Self {
            amplitudes: amplitudes.iter().map(|a| a * scale).collect(),
            num_qubits,
        })
    }

    pub fn from_real(amplitudes: &[f64], num_qubits: usize) -> Result<Self> {
        let complex: Vec<Complex64> = amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::initialize(&complex, num_qubits)
    }

    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits.min(MAX_QUBITS)];
        amps[0] = Complex64::new(1.0, 0.0);
        Self::initialize(&amps, num_qubits)
    }

    /// Tensor product `self ⊗ other`; `self` takes the high-order qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        if num_qubits > MAX_QUBITS {
            return Err(Error::Parameter(format!(
                "tensor product needs {num_qubits} qubits, limit is {MAX_QUBITS}"
            )));
        }
        let mut amplitudes = Vec::with_capacity(1usize << num_qubits);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self { amplitudes, num_qubits })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Real parts of the amplitudes, in basis order.
    pub fn real_parts(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1usize << (self.num_qubits - 1 - qubit))
    }

    /// Returns a new state with `gate` applied.
    pub fn apply_gate(&self, gate: Gate) -> Result<Self> {
        let mut next = self.clone();
        next.apply_in_place(gate)?;
        Ok(next)
    }

    /// Applies `gates` in order, returning the final state.
    pub fn apply_circuit(&self, gates: &[Gate]) -> Result<Self> {
        let mut next = self.clone();
        for &gate in gates {
            next.apply_in_place(gate)?;
        }
        Ok(next)
    }

    fn apply_in_place(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let h = Complex64::new(s, 0.0);
                self.apply_single(q, [[h, h], [h, -h]])
            }
            Gate::X(q) => {
                let mask = self.mask(q)?;
                for i in 0..self.amplitudes.len() {
                    if i & mask == 0 {
                        self.amplitudes.swap(i, i | mask);
                    }
                }
                Ok(())
            }
            Gate::Rx(q, theta) => {
                if !theta.is_finite() {
                    return Err(Error::Parameter(format!("non-finite RX angle {theta}")));
                }
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(theta / 2.0).sin());
                self.apply_single(q, [[c, s], [s, c]])
            }
            Gate::Cswap { control, a, b } => {
                let mc = self.mask(control)?;
                let ma = self.mask(a)?;
                let mb = self.mask(b)?;
                if control == a || control == b || a == b {
                    return Err(Error::Parameter(format!(
                        "CSWAP qubits must be distinct, got control={control} a={a} b={b}"
                    )));
                }
                for i in 0..self.amplitudes.len() {
                    // visit each swapped pair once: control set, a=1, b=0
                    if i & mc != 0 && i & ma != 0 && i & mb == 0 {
                        self.amplitudes.swap(i, (i & !ma) | mb);
                    }
                }
                Ok(())
            }
        }
    }

    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        let mask = self.mask(qubit)?;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Marginal outcome probabilities of `qubit`, `(p0, p1)`.
    pub fn marginal(&self, qubit: usize) -> Result<(f64, f64)> {
        let mask = self.mask(qubit)?;
        let (mut s0, mut s1) = (0.0, 0.0);
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & mask == 0 {
                s0 += a.norm_sqr();
            } else {
                s1 += a.norm_sqr();
            }
        }
        let total = s0 + s1;
        Ok((s0 / total, s1 / total))
    }

    /// Measures `qubit`. `shots == 0` returns the exact marginal; otherwise
    /// the counts are drawn from a stream seeded by `seed`.
    pub fn measure_qubit(&self, qubit: usize, shots: u64, seed: u64) -> Result<MeasurementOutcome> {
        let (p0, p1) = self.marginal(qubit)?;
        if shots == 0 {
            return Ok(MeasurementOutcome {
                p0,
                p1,
                shots,
                counts0: 0,
                counts1: 0,
            });
        }
        let mut rng = rng::stream(seed, &[rng::TAG_SWAP_TEST, qubit as u64]);
        let counts1 = sample_binomial(&mut rng, shots, p1);
        let counts0 = shots - counts1;
        Ok(MeasurementOutcome {
            p0: counts0 as f64 / shots as f64,
            p1: counts1 as f64 / shots as f64,
            shots,
            counts0,
            counts1,
        })
    }
}

fn sample_binomial<R: Rng>(rng: &mut R, shots: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    Binomial::new(shots, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}
