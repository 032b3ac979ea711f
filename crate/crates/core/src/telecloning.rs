//! Ancilla-free 1→2 phase-covariant telecloning over a shared three-qudit
//! channel.
//!
//! Alice holds the input `A1` and channel qudit `A2`; Bob and Charlie hold
//! `B` and `C`. The simulation register is `(A1, A2, B, C)`. Alice measures
//! `(A1, A2)` in the generalized Bell basis, broadcasts `(l, k)`, and each
//! receiver applies `U^{lk} = Σ_j e^{2πijk/d} |j⟩⟨j⊕l|` locally.

use std::f64::consts::{SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::cloning::{phase_state, phi_basis_state, PhaseVector};
use crate::error::{Error, Result};
use crate::qudit::{fidelity, shannon_bits, von_neumann_entropy, PartialTrace, QuditDim, Register, StateVector, TAU_NORM};

/// Real non-negative channel amplitudes `x_0..x_{d-1}` with `Σ x_j² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAmplitudes {
    x: Vec<f64>,
}

impl ChannelAmplitudes {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        Self::check_entries(&x)?;
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if (n2 - 1.0).abs() > TAU_NORM {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { x })
    }

    /// Rescales a non-negative, non-zero vector onto the unit sphere.
    pub fn normalize(x: Vec<f64>) -> Result<Self> {
        Self::check_entries(&x)?;
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if !(n2 > 0.0) {
            return Err(Error::NotNormalized(n2));
        }
        let n = n2.sqrt();
        Ok(Self {
            x: x.into_iter().map(|v| v / n).collect(),
        })
    }

    fn check_entries(x: &[f64]) -> Result<()> {
        QuditDim::new(x.len())?;
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidAmplitude { index, value });
        }
        Ok(())
    }

    /// `x_j = 1/√d`: the maximally entangled channel.
    pub fn uniform(d: QuditDim) -> Self {
        Self {
            x: vec![1.0 / d.as_f64().sqrt(); d.get()],
        }
    }

    /// `x = (1, 0, …, 0)`: a product channel.
    pub fn product(d: QuditDim) -> Self {
        let mut x = vec![0.0; d.get()];
        x[0] = 1.0;
        Self { x }
    }

    /// Entries drawn uniformly from `[0, 1)` and normalized.
    pub fn random<R: Rng + ?Sized>(d: QuditDim, rng: &mut R) -> Self {
        loop {
            let x: Vec<f64> = (0..d.get()).map(|_| rng.random::<f64>()).collect();
            if x.iter().any(|&v| v > 0.0) {
                return Self::normalize(x).expect("non-negative, non-zero");
            }
        }
    }

    pub fn dim(&self) -> QuditDim {
        QuditDim::new(self.x.len()).expect("validated at construction")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }
}

/// Generalized Bell measurement outcome `(l, k)`: shift `l`, phase `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellOutcome {
    pub l: usize,
    pub k: usize,
}

impl BellOutcome {
    pub fn new(d: QuditDim, l: usize, k: usize) -> Result<Self> {
        d.check_index(l)?;
        d.check_index(k)?;
        Ok(Self { l, k })
    }

    /// All `d²` outcomes in `(l, k)` lexicographic order.
    pub fn all(d: QuditDim) -> impl Iterator<Item = BellOutcome> {
        let n = d.get();
        (0..n).flat_map(move |l| (0..n).map(move |k| BellOutcome { l, k }))
    }
}

/// Result of projecting `(A1, A2)` onto one Bell state.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub probability: f64,
    /// Renormalized `(B, C)` state; `None` when the outcome is degenerate.
    pub collapsed: Option<StateVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub corrected_state: StateVector,
    pub fidelity_b: f64,
    pub fidelity_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub d: QuditDim,
    pub theta: PhaseVector,
    pub x: ChannelAmplitudes,
    /// One record per outcome, sorted by `(l, k)`.
    pub records: Vec<OutcomeRecord>,
    /// `Σ p · (F_B + F_C)/2` over all outcomes.
    pub mean_fidelity: f64,
}

impl ProtocolRun {
    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.probability).sum()
    }

    /// Largest `|F - target|` over both clones of every outcome.
    pub fn max_fidelity_deviation(&self, target: f64) -> f64 {
        self.records
            .iter()
            .flat_map(|r| [r.fidelity_b, r.fidelity_c])
            .map(|f| (f - target).abs())
            .fold(0.0, f64::max)
    }

    /// Draws `shots` outcomes according to the recorded probabilities.
    pub fn sample_outcomes<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<BellOutcome> {
        let total = self.total_probability();
        (0..shots)
            .map(|_| {
                let mut u = rng.random::<f64>() * total;
                for r in &self.records {
                    if u < r.probability {
                        return r.outcome;
                    }
                    u -= r.probability;
                }
                self.records.last().expect("at least four outcomes").outcome
            })
            .collect()
    }
}

fn check_same_dim(theta: &PhaseVector, x: &ChannelAmplitudes) -> Result<QuditDim> {
    let d = x.dim();
    if theta.dim() != d {
        return Err(Error::DimensionMismatch {
            left: theta.dim().get(),
            right: d.get(),
        });
    }
    Ok(d)
}

/// `Σ_j x_j |j⟩_{A2} |φ^0_j⟩_{BC}` on `(A2, B, C)`.
pub fn channel_state(x: &ChannelAmplitudes) -> StateVector {
    let d = x.dim();
    let n = d.get();
    let mut amps = Vec::with_capacity(n * n * n);
    for (j, &xj) in x.as_slice().iter().enumerate() {
        let phi = phi_basis_state(d, 0, j).expect("j < d");
        amps.extend(phi.amplitudes().iter().map(|a| a * xj));
    }
    StateVector::new(Register::uniform(d, 3), amps).expect("d³ amplitudes")
}

/// Entropy of the `A2` reduction in bits, from the Schmidt weights `x_j²`.
pub fn channel_entropy(x: &ChannelAmplitudes) -> f64 {
    shannon_bits(x.as_slice().iter().map(|v| v * v))
}

/// Entanglement across `A2 | (B, C)`, obtained by reducing the simulated
/// channel state and diagonalizing.
pub fn channel_entanglement(x: &ChannelAmplitudes) -> f64 {
    let rho = channel_state(x)
        .partial_trace(&[0])
        .expect("subsystem 0 exists");
    von_neumann_entropy(&rho).expect("reduction of a pure state is a valid density matrix")
}

/// `(1/√d) Σ_j e^{2πijk/d} |j⟩|j⊕l⟩`.
pub fn bell_state(d: QuditDim, l: usize, k: usize) -> Result<StateVector> {
    d.check_index(l)?;
    d.check_index(k)?;
    let n = d.get();
    let norm = 1.0 / d.as_f64().sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let phase = TAU * ((j * k) % n) as f64 / d.as_f64();
        amps[j * n + (j + l) % n] = Complex64::from_polar(norm, phase);
    }
    StateVector::new(Register::uniform(d, 2), amps)
}

/// Input phase state on `A1` tensored with the channel on `(A2, B, C)`.
pub fn total_state(theta: &PhaseVector, x: &ChannelAmplitudes) -> Result<StateVector> {
    let d = check_same_dim(theta, x)?;
    let input = phase_state(d, theta)?;
    crate::qudit::tensor_product(&input, &channel_state(x))
}

/// Projects `(A1, A2)` of a four-qudit state onto `|Φ^{lk}⟩`.
pub fn measure(total: &StateVector, outcome: BellOutcome) -> Result<Measurement> {
    let dims = total.register().dims();
    if dims.len() != 4 || dims.iter().any(|&n| n != dims[0]) {
        return Err(Error::InvalidArgument(format!(
            "measurement expects four equal qudits, got dims {dims:?}"
        )));
    }
    let d = QuditDim::new(dims[0])?;
    let bell = bell_state(d, outcome.l, outcome.k)?;
    let branch = total.contract_leading(&bell)?;
    let probability = branch.norm_sqr();
    let collapsed = if probability < TAU_NORM {
        None
    } else {
        Some(branch.normalized()?)
    };
    Ok(Measurement {
        probability,
        collapsed,
    })
}

/// `U^{lk} = Σ_j e^{2πijk/d} |j⟩⟨j⊕l|`.
pub fn correction_unitary(d: QuditDim, outcome: BellOutcome) -> DMatrix<Complex64> {
    let n = d.get();
    let mut u = DMatrix::zeros(n, n);
    for j in 0..n {
        let phase = TAU * ((j * outcome.k) % n) as f64 / d.as_f64();
        u[(j, (j + outcome.l) % n)] = Complex64::from_polar(1.0, phase);
    }
    u
}

/// Post-correction `(B, C)` state written out directly:
/// `Σ_j x_{j⊕l} e^{iθ_j} |φ^{(d-l) mod d}_j⟩`, with the global phase
/// `e^{2πi(d-l)k/d}` dropped.
pub fn expected_corrected_state(theta: &PhaseVector, x: &ChannelAmplitudes, outcome: BellOutcome) -> Result<StateVector> {
    let d = check_same_dim(theta, x)?;
    BellOutcome::new(d, outcome.l, outcome.k)?;
    let n = d.get();
    let anchor = (n - outcome.l) % n;
    let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let c = Complex64::from_polar(x.as_slice()[(j + outcome.l) % n], theta.as_slice()[j]);
        let phi = phi_basis_state(d, anchor, j)?;
        for (slot, a) in amps.iter_mut().zip(phi.amplitudes()) {
            *slot += c * a;
        }
    }
    StateVector::new(Register::uniform(d, 2), amps)
}

/// Simulates every measurement branch of the protocol.
pub fn run_protocol(theta: &PhaseVector, x: &ChannelAmplitudes) -> Result<ProtocolRun> {
    let d = check_same_dim(theta, x)?;
    let input = phase_state(d, theta)?;
    let total = total_state(theta, x)?;
    let mut records = Vec::with_capacity(d.get() * d.get());
    for outcome in BellOutcome::all(d) {
        let m = measure(&total, outcome)?;
        let collapsed = m.collapsed.ok_or(Error::DegenerateOutcome {
            l: outcome.l,
            k: outcome.k,
            probability: m.probability,
        })?;
        let u = correction_unitary(d, outcome);
        let corrected = collapsed.apply_local(0, &u)?.apply_local(1, &u)?;
        let fidelity_b = fidelity(&input, &corrected.partial_trace(&[0])?)?;
        let fidelity_c = fidelity(&input, &corrected.partial_trace(&[1])?)?;
        records.push(OutcomeRecord {
            outcome,
            probability: m.probability,
            corrected_state: corrected,
            fidelity_b,
            fidelity_c,
        });
    }
    let mean_fidelity = records
        .iter()
        .map(|r| r.probability * 0.5 * (r.fidelity_b + r.fidelity_c))
        .sum();
    Ok(ProtocolRun {
        d,
        theta: theta.clone(),
        x: x.clone(),
        records,
        mean_fidelity,
    })
}

/// Closed-form clone fidelity for raw amplitudes (no validation):
/// `(1/d)(1 + √2 x_0 Σ_{j≥1} x_j + Σ_{1≤j<k} x_j x_k)`.
pub fn fidelity_formula(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let (x0, rest) = x.split_first().expect("non-empty amplitudes");
    let sum: f64 = rest.iter().sum();
    let sum_sq: f64 = rest.iter().map(|v| v * v).sum();
    // Σ_{j<k} x_j x_k = ((Σ x)² - Σ x²) / 2
    let pairs = 0.5 * (sum * sum - sum_sq);
    (1.0 + SQRT_2 * x0 * sum + pairs) / d
}

/// Gradient of [`fidelity_formula`] with respect to each amplitude.
pub fn fidelity_gradient(x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    let (x0, rest) = x.split_first().expect("non-empty amplitudes");
    let sum: f64 = rest.iter().sum();
    std::iter::once(SQRT_2 * sum / d)
        .chain(rest.iter().map(|xj| (SQRT_2 * x0 + sum - xj) / d))
        .collect()
}

pub fn fidelity_analytic(x: &ChannelAmplitudes) -> f64 {
    fidelity_formula(x.as_slice())
}

/// Channel amplitudes at which the telecloned fidelity reaches the optimal
/// phase-covariant bound: `x_0 = X(d)`, `x_{j≥1} = Y(d)` with
/// `D = √(d² + 4d - 4)`.
pub fn optimal_amplitudes(d: QuditDim) -> ChannelAmplitudes {
    let (x0, y) = optimal_xy(d);
    let mut x = vec![y; d.get()];
    x[0] = x0;
    ChannelAmplitudes { x }
}

/// `(X(d), Y(d))`.
pub fn optimal_xy(d: QuditDim) -> (f64, f64) {
    let d = d.as_f64();
    let big_d = (d * d + 4.0 * d - 4.0).sqrt();
    let denom = big_d * (big_d + d - 2.0);
    let x0 = (4.0 * (d - 1.0) / denom).sqrt();
    let y = ((d * d + (d - 2.0) * big_d) / (denom * (d - 1.0))).sqrt();
    (x0, y)
}
