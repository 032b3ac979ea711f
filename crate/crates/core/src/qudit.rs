//! Dense state-vector and density-matrix algebra over registers of qudits.
//!
//! Composite indices are mixed-radix big-endian: the leftmost subsystem of a
//! register is the most significant digit. For the four-qudit telecloning
//! register `(A1, A2, B, C)` this gives `((a1 * d + a2) * d + b) * d + c`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default normalization / Hermiticity tolerance.
pub const TAU_NORM: f64 = 1e-10;
/// Default tolerance for analytic-vs-simulated cross-checks.
pub const TAU_CROSS: f64 = 1e-9;
/// Default optimizer convergence threshold.
pub const TAU_OPT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub norm: f64,
    pub cross: f64,
    pub opt: f64,
}

impl Tolerances {
    pub fn new(norm: f64, cross: f64, opt: f64) -> Result<Self> {
        for t in [norm, cross, opt] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidTolerance(t));
            }
        }
        Ok(Self { norm, cross, opt })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: TAU_NORM,
            cross: TAU_CROSS,
            opt: TAU_OPT,
        }
    }
}

/// Local dimension of a qudit, always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuditDim(usize);

impl QuditDim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub(crate) fn check_index(self, index: usize) -> Result<()> {
        if index >= self.0 {
            return Err(Error::IndexOutOfRange { index, dim: self.0 });
        }
        Ok(())
    }
}

impl TryFrom<usize> for QuditDim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl fmt::Display for QuditDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    dims: Vec<usize>,
}

/// Index bookkeeping for splitting a register into kept and traced parts.
struct Split {
    kept: Register,
    traced_dim: usize,
    kept_of: Vec<usize>,
    traced_of: Vec<usize>,
}

impl Register {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("register needs at least one subsystem".into()));
        }
        for &d in &dims {
            QuditDim::new(d)?;
        }
        Ok(Self { dims })
    }

    /// `n` subsystems of dimension `d`.
    pub fn uniform(d: QuditDim, n: usize) -> Self {
        assert!(n > 0, "register needs at least one subsystem");
        Self { dims: vec![d.get(); n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &Register) -> Register {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Register { dims }
    }

    /// Mixed-radix digits of a composite index, most significant first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::LengthMismatch {
                expected: self.dims.len(),
                actual: digits.len(),
            });
        }
        let mut index = 0;
        for (&digit, &d) in digits.iter().zip(&self.dims) {
            if digit >= d {
                return Err(Error::IndexOutOfRange { index: digit, dim: d });
            }
            index = index * d + digit;
        }
        Ok(index)
    }

    fn split(&self, keep: &[usize]) -> Result<Split> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut mask = vec![false; self.dims.len()];
        for &k in keep {
            if k >= self.dims.len() {
                return Err(Error::SubsystemOutOfRange {
                    index: k,
                    len: self.dims.len(),
                });
            }
            mask[k] = true;
        }
        let kept_dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&mask)
            .filter_map(|(&d, &m)| m.then_some(d))
            .collect();
        let traced_dim: usize = self
            .dims
            .iter()
            .zip(&mask)
            .filter_map(|(&d, &m)| (!m).then_some(d))
            .product();

        let n = self.total_dim();
        let mut kept_of = Vec::with_capacity(n);
        let mut traced_of = Vec::with_capacity(n);
        for i in 0..n {
            let (mut ki, mut ti) = (0, 0);
            for ((digit, &d), &m) in self.digits(i).into_iter().zip(&self.dims).zip(&mask) {
                if m {
                    ki = ki * d + digit;
                } else {
                    ti = ti * d + digit;
                }
            }
            kept_of.push(ki);
            traced_of.push(ti);
        }
        Ok(Split {
            kept: Register { dims: kept_dims },
            traced_dim,
            kept_of,
            traced_of,
        })
    }
}

/// Pure state on a register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    register: Register,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(register: Register, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != register.total_dim() {
            return Err(Error::LengthMismatch {
                expected: register.total_dim(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(register: Register, index: usize) -> Result<Self> {
        let n = register.total_dim();
        if index >= n {
            return Err(Error::IndexOutOfRange { index, dim: n });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            register,
            amplitudes,
        })
    }

    pub fn zeros(register: Register) -> Self {
        let n = register.total_dim();
        Self {
            register,
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(self.norm_sqr()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            register: self.register.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.register != other.register {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Kronecker product without normalization checks.
    pub(crate) fn kron(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        StateVector {
            register: self.register.concat(&other.register),
            amplitudes,
        }
    }

    /// Applies a single-subsystem operator to subsystem `site`.
    pub fn apply_local(&self, site: usize, op: &DMatrix<Complex64>) -> Result<StateVector> {
        let dims = self.register.dims();
        if site >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: site,
                len: dims.len(),
            });
        }
        let d = dims[site];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: op.nrows().max(op.ncols()),
            });
        }
        let inner: usize = dims[site + 1..].iter().product();
        let outer: usize = dims[..site].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for o in 0..outer {
            for i in 0..inner {
                let at = |a: usize| (o * d + a) * inner + i;
                for row in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for col in 0..d {
                        acc += op[(row, col)] * self.amplitudes[at(col)];
                    }
                    out[at(row)] = acc;
                }
            }
        }
        Ok(StateVector {
            register: self.register.clone(),
            amplitudes: out,
        })
    }

    /// Contracts the leading subsystems with `⟨bra|`, returning the
    /// unnormalized state on the remaining subsystems.
    pub fn contract_leading(&self, bra: &StateVector) -> Result<StateVector> {
        let lead = bra.register.dims();
        let dims = self.register.dims();
        if lead.len() >= dims.len() || dims[..lead.len()] != *lead {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: bra.dim(),
            });
        }
        let rest = Register {
            dims: dims[lead.len()..].to_vec(),
        };
        let r = rest.total_dim();
        let mut out = vec![Complex64::new(0.0, 0.0); r];
        for (a, b) in bra.amplitudes.iter().enumerate() {
            let bc = b.conj();
            if bc == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (slot, amp) in out.iter_mut().zip(&self.amplitudes[a * r..(a + 1) * r]) {
                *slot += bc * amp;
            }
        }
        Ok(StateVector {
            register: rest,
            amplitudes: out,
        })
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix {
            register: self.register.clone(),
            entries: &v * v.adjoint(),
        }
    }
}

/// Mixed state on a register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    register: Register,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(register: Register, entries: DMatrix<Complex64>) -> Result<Self> {
        let n = register.total_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { register, entries })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.projector()
    }

    /// `I / dim`.
    pub fn maximally_mixed(register: Register) -> Self {
        let n = register.total_dim();
        let entries = DMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0);
        Self { register, entries }
    }

    /// Diagonal density matrix with the given (real) weights.
    pub fn diagonal(register: Register, weights: &[f64]) -> Result<Self> {
        let n = register.total_dim();
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: weights.len(),
            });
        }
        let diag = nalgebra::DVector::from_iterator(n, weights.iter().map(|&w| Complex64::new(w, 0.0)));
        Ok(Self {
            register,
            entries: DMatrix::from_diagonal(&diag),
        })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order; rejects non-Hermitian input.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let dev = self.hermitian_deviation();
        if dev > TAU_NORM {
            return Err(Error::NotHermitian(dev));
        }
        let mut vals: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        if self.hermitian_deviation() > tol || (self.trace() - 1.0).norm() > tol {
            return false;
        }
        match self.eigenvalues() {
            Ok(vals) => vals.iter().all(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// Frobenius-norm distance to another matrix on the same register.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.register != other.register {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok((&self.entries - &other.entries).norm())
    }
}

/// Reduction onto a subset of subsystems.
pub trait PartialTrace {
    /// Reduced density matrix on the subsystems in `keep` (kept in register
    /// order regardless of the order given).
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = self.register.split(keep)?;
        let kd = split.kept.total_dim();
        // rho = M M^dagger with M[kept, traced] = psi[index]
        let mut m = DMatrix::<Complex64>::zeros(kd, split.traced_dim);
        for (i, amp) in self.amplitudes.iter().enumerate() {
            m[(split.kept_of[i], split.traced_of[i])] = *amp;
        }
        Ok(DensityMatrix {
            register: split.kept,
            entries: &m * m.adjoint(),
        })
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = self.register.split(keep)?;
        let kd = split.kept.total_dim();
        let n = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(kd, kd);
        for i in 0..n {
            for j in 0..n {
                if split.traced_of[i] == split.traced_of[j] {
                    out[(split.kept_of[i], split.kept_of[j])] += self.entries[(i, j)];
                }
            }
        }
        Ok(DensityMatrix {
            register: split.kept,
            entries: out,
        })
    }
}

pub fn partial_trace<T: PartialTrace + ?Sized>(state: &T, keep: &[usize]) -> Result<DensityMatrix> {
    state.partial_trace(keep)
}

/// `a ⊗ b`; both inputs must be normalized.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    for s in [a, b] {
        if !s.is_normalized(TAU_NORM) {
            return Err(Error::NotNormalized(s.norm_sqr()));
        }
    }
    Ok(a.kron(b))
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: rho.dim(),
        });
    }
    let amps = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, a) in amps.iter().enumerate() {
        let row: Complex64 = amps.iter().enumerate().map(|(j, b)| rho.entries[(i, j)] * b).sum();
        acc += a.conj() * row;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// `-Σ p log2 p`, with `0 log 0 = 0`.
pub fn shannon_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let vals = rho.eigenvalues()?;
    if let Some(&lowest) = vals.first() {
        if lowest < -TAU_NORM {
            return Err(Error::NegativeEigenvalue(lowest));
        }
    }
    let max = (rho.dim() as f64).log2();
    Ok(shannon_bits(vals.into_iter().map(|v| v.max(0.0))).min(max))
}

/// True when the states agree up to a global phase: `|⟨a|b⟩| ≥ 1 - tol`.
pub fn global_phase_equal(a: &StateVector, b: &StateVector, tol: f64) -> bool {
    match a.inner(b) {
        Ok(overlap) => overlap.norm() >= 1.0 - tol,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubits(n: usize) -> Register {
        Register::uniform(QuditDim::new(2).unwrap(), n)
    }

    fn ket(d: usize, amps: &[Complex64]) -> StateVector {
        StateVector::new(Register::new(vec![d]).unwrap(), amps.to_vec()).unwrap()
    }

    #[test]
    fn dimension_below_two_is_rejected() {
        assert_eq!(QuditDim::new(0), Err(Error::InvalidDimension(0)));
        assert_eq!(QuditDim::new(1), Err(Error::InvalidDimension(1)));
        assert!(QuditDim::new(2).is_ok());
        assert!(Register::new(vec![2, 1]).is_err());
        assert!(Register::new(vec![]).is_err());
    }

    #[test]
    fn mixed_radix_digits_are_big_endian() {
        let r = Register::new(vec![3, 3, 3, 3]).unwrap();
        let idx = ((2 * 3 + 1) * 3 + 0) * 3 + 2;
        assert_eq!(r.digits(idx), vec![2, 1, 0, 2]);
        assert_eq!(r.index_of(&[2, 1, 0, 2]).unwrap(), idx);
        assert_eq!(r.total_dim(), 81);
    }

    #[test]
    fn tensor_of_zero_kets() {
        let z = StateVector::basis(qubits(1), 0).unwrap();
        let zz = tensor_product(&z, &z).unwrap();
        assert_eq!(zz.dim(), 4);
        assert_eq!(zz.amplitude(0), c(1.0, 0.0));
        assert_eq!(zz.norm_sqr(), 1.0);
    }

    #[test]
    fn tensor_plus_with_one() {
        let plus = ket(2, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        let one = StateVector::basis(qubits(1), 1).unwrap();
        let out = tensor_product(&plus, &one).unwrap();
        let expect = [0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        for (a, e) in out.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn tensor_rejects_unnormalized_input() {
        let bad = ket(2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let z = StateVector::basis(qubits(1), 0).unwrap();
        assert!(matches!(tensor_product(&bad, &z), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn partial_trace_of_product_basis_state() {
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        let rho = zz.partial_trace(&[0]).unwrap();
        let expect = StateVector::basis(qubits(1), 0).unwrap().projector();
        assert!(rho.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let s = FRAC_1_SQRT_2;
        let bell = StateVector::new(qubits(2), vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(qubits(1));
        for keep in [[0], [1]] {
            let rho = bell.partial_trace(&keep).unwrap();
            assert!(rho.distance(&mixed).unwrap() < 1e-15);
            // density-matrix route agrees with the pure-state route
            let rho2 = bell.projector().partial_trace(&keep).unwrap();
            assert!(rho.distance(&rho2).unwrap() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        assert_eq!(zz.partial_trace(&[]), Err(Error::EmptyKeep));
        assert!(matches!(
            zz.partial_trace(&[2]),
            Err(Error::SubsystemOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn partial_trace_keeps_register_order() {
        // |0⟩|1⟩|2⟩ on three qutrits, keep {2, 0} -> |0⟩|2⟩
        let r = Register::new(vec![3, 3, 3]).unwrap();
        let s = StateVector::basis(r.clone(), r.index_of(&[0, 1, 2]).unwrap()).unwrap();
        let rho = s.partial_trace(&[2, 0]).unwrap();
        assert_eq!(rho.register().dims(), &[3, 3]);
        assert_abs_diff_eq!(rho.entries()[(2, 2)].re, 1.0);
    }

    #[test]
    fn fidelity_trivial_cases() {
        let z = StateVector::basis(qubits(1), 0).unwrap();
        let o = StateVector::basis(qubits(1), 1).unwrap();
        assert_abs_diff_eq!(fidelity(&z, &z.projector()).unwrap(), 1.0);
        assert_abs_diff_eq!(fidelity(&z, &o.projector()).unwrap(), 0.0);
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        assert!(matches!(fidelity(&z, &zz.projector()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_of_pure_and_mixed_states() {
        let z = StateVector::basis(qubits(1), 0).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&z.projector()).unwrap(), 0.0, epsilon = 1e-12);
        for d in 2..=7 {
            let r = Register::new(vec![d]).unwrap();
            let h = von_neumann_entropy(&DensityMatrix::maximally_mixed(r)).unwrap();
            assert_abs_diff_eq!(h, (d as f64).log2(), epsilon = 1e-12);
        }
    }

    #[test]
    fn entropy_of_diagonal_matches_shannon_formula() {
        // direct formula evaluated by hand for x^2 = (0.5, 0.3, 0.2)
        let w = [0.5, 0.3, 0.2];
        let expected = -(0.5f64 * 0.5f64.log2() + 0.3 * 0.3f64.log2() + 0.2 * 0.2f64.log2());
        let rho = DensityMatrix::diagonal(Register::new(vec![3]).unwrap(), &w).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        m[(0, 1)] = c(0.3, 0.0);
        let rho = DensityMatrix::new(qubits(1), m).unwrap();
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn entropy_clamps_tiny_negative_eigenvalues() {
        let rho = DensityMatrix::diagonal(qubits(1), &[1.0 + 1e-12, -1e-12]).unwrap();
        let h = von_neumann_entropy(&rho).unwrap();
        assert!(h.is_finite() && h >= 0.0);
        let bad = DensityMatrix::diagonal(qubits(1), &[1.1, -0.1]).unwrap();
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn global_phase_comparison() {
        let z = StateVector::basis(qubits(1), 0).unwrap();
        let zp = z.scale(Complex64::from_polar(1.0, PI / 3.0));
        let o = StateVector::basis(qubits(1), 1).unwrap();
        assert!(global_phase_equal(&z, &zp, 1e-12));
        assert!(!global_phase_equal(&z, &o, 1e-12));
    }

    #[test]
    fn apply_local_acts_on_the_right_subsystem() {
        // X on subsystem 1 of |00⟩ gives |01⟩ (index 1)
        let mut x = DMatrix::<Complex64>::zeros(2, 2);
        x[(0, 1)] = c(1.0, 0.0);
        x[(1, 0)] = c(1.0, 0.0);
        let zz = StateVector::basis(qubits(2), 0).unwrap();
        let out = zz.apply_local(1, &x).unwrap();
        assert_eq!(out.amplitude(1), c(1.0, 0.0));
        let out = zz.apply_local(0, &x).unwrap();
        assert_eq!(out.amplitude(2), c(1.0, 0.0));
        assert!(zz.apply_local(2, &x).is_err());
    }

    #[test]
    fn contract_leading_projects_prefix() {
        let r = Register::new(vec![3, 3]).unwrap();
        let s = StateVector::basis(r.clone(), r.index_of(&[1, 2]).unwrap()).unwrap();
        let bra = StateVector::basis(Register::new(vec![3]).unwrap(), 1).unwrap();
        let rest = s.contract_leading(&bra).unwrap();
        assert_eq!(rest.dim(), 3);
        assert_eq!(rest.amplitude(2), c(1.0, 0.0));
        let other = StateVector::basis(Register::new(vec![3]).unwrap(), 0).unwrap();
        assert_abs_diff_eq!(s.contract_leading(&other).unwrap().norm_sqr(), 0.0);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Tolerances::new(1e-10, 1e-9, 1e-9).is_ok());
        assert!(Tolerances::new(0.0, 1e-9, 1e-9).is_err());
        assert!(Tolerances::new(1e-10, -1.0, 1e-9).is_err());
        assert_eq!(Tolerances::default().norm, TAU_NORM);
    }
}
