//! Local ancilla-free 1→2 phase-covariant cloner and its fidelity benchmarks.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qudit::{fidelity, PartialTrace, QuditDim, Register, StateVector};

/// Relative phases `θ_j` of an equatorial qudit state, reduced into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    theta: Vec<f64>,
}

impl PhaseVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::InvalidDimension(theta.len()));
        }
        if let Some((index, &value)) = theta.iter().enumerate().find(|(_, t)| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("phase {index} is not finite ({value})")));
        }
        let theta = theta
            .into_iter()
            .map(|t| {
                let r = t.rem_euclid(TAU);
                // rem_euclid can round up to exactly 2π for tiny negative inputs
                if r >= TAU { 0.0 } else { r }
            })
            .collect();
        Ok(Self { theta })
    }

    pub fn zeros(d: QuditDim) -> Self {
        Self {
            theta: vec![0.0; d.get()],
        }
    }

    /// Independent uniform phases in `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(d: QuditDim, rng: &mut R) -> Self {
        Self {
            theta: (0..d.get()).map(|_| rng.random_range(0.0..TAU)).collect(),
        }
    }

    pub fn dim(&self) -> QuditDim {
        QuditDim::new(self.theta.len()).expect("validated at construction")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }
}

/// Two-qudit output of the cloner.
#[derive(Debug, Clone, PartialEq)]
pub struct CloneOutput {
    pub state: StateVector,
    pub fidelity_each: f64,
}

/// `(1/√d) Σ_j e^{iθ_j} |j⟩`.
pub fn phase_state(d: QuditDim, theta: &PhaseVector) -> Result<StateVector> {
    if theta.as_slice().len() != d.get() {
        return Err(Error::LengthMismatch {
            expected: d.get(),
            actual: theta.as_slice().len(),
        });
    }
    let norm = 1.0 / d.as_f64().sqrt();
    let amps = theta
        .as_slice()
        .iter()
        .map(|&t| Complex64::from_polar(norm, t))
        .collect();
    StateVector::new(Register::new(vec![d.get()])?, amps)
}

/// Symmetric two-qudit basis state `|φ^k_j⟩`: `|kk⟩` if `j == k`, otherwise
/// `(|jk⟩ + |kj⟩)/√2`.
pub fn phi_basis_state(d: QuditDim, k: usize, j: usize) -> Result<StateVector> {
    d.check_index(k)?;
    d.check_index(j)?;
    let n = d.get();
    let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
    if j == k {
        amps[k * n + k] = Complex64::new(1.0, 0.0);
    } else {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[j * n + k] = s;
        amps[k * n + j] = s;
    }
    StateVector::new(Register::uniform(d, 2), amps)
}

/// Runs the cloner `|j⟩|0⟩ → |φ^0_j⟩` on a single-qudit input (extended
/// linearly), reporting the fidelity of clone 1 against the input.
pub fn econ_clone(input: &StateVector) -> Result<CloneOutput> {
    let dims = input.register().dims();
    if dims.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "cloner takes a single qudit, got {} subsystems",
            dims.len()
        )));
    }
    let d = QuditDim::new(dims[0])?;
    let mut amps = vec![Complex64::new(0.0, 0.0); d.get() * d.get()];
    for (j, c) in input.amplitudes().iter().enumerate() {
        let phi = phi_basis_state(d, 0, j)?;
        for (slot, a) in amps.iter_mut().zip(phi.amplitudes()) {
            *slot += c * a;
        }
    }
    let state = StateVector::new(Register::uniform(d, 2), amps)?;
    let rho = state.partial_trace(&[0])?;
    let fidelity_each = fidelity(input, &rho)?;
    Ok(CloneOutput {
        state,
        fidelity_each,
    })
}

/// Clone fidelity of the ancilla-free cloner on equatorial inputs:
/// `[(d-1)² + (1+2√2)(d-1) + 2] / (2d²)`.
pub fn econ_fidelity_analytic(d: QuditDim) -> f64 {
    let d = d.as_f64();
    let m = d - 1.0;
    (m * m + (1.0 + 2.0 * SQRT_2) * m + 2.0) / (2.0 * d * d)
}

/// Optimal 1→2 phase-covariant clone fidelity:
/// `(d + 2 + √(d² + 4d - 4)) / (4d)`.
pub fn opt_fidelity_analytic(d: QuditDim) -> f64 {
    let d = d.as_f64();
    (d + 2.0 + (d * d + 4.0 * d - 4.0).sqrt()) / (4.0 * d)
}
