//! Property suite run by `teleclone verify`.
//!
//! Every check is deterministic for a given `(max_d, seed)`; the rendered
//! report is meant to be diffed byte-for-byte between runs.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    argmax_entropy, argmax_fidelity, central_difference, maximize_fidelity, sweep_markers, sweep_x0, symmetric_channel, window,
    DEFAULT_POINTS, DEFAULT_RESTARTS,
};
use crate::cloning::{econ_clone, econ_fidelity_analytic, opt_fidelity_analytic, phase_state, PhaseVector};
use crate::error::{Error, Result};
use crate::qudit::{
    fidelity, tensor_product, von_neumann_entropy, PartialTrace, QuditDim, Register, StateVector, Tolerances,
};
use crate::telecloning::{
    channel_entropy, channel_state, correction_unitary, expected_corrected_state, fidelity_formula, fidelity_gradient, optimal_amplitudes,
    run_protocol, BellOutcome, ChannelAmplitudes, ProtocolRun,
};

const RANDOM_STATES: usize = 8;
const CLONE_PHASES: usize = 100;
const PROTOCOL_PHASES: usize = 50;
const RANDOM_CHANNELS: usize = 10;
const OPTIMIZER_F_TOL: f64 = 1e-6;
const OPTIMIZER_X_TOL: f64 = 1e-4;
const UNITARY_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_d: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Closed-form fidelity the simulation is checked against.
    pub formula: fn(&[f64]) -> f64,
}

impl VerifyConfig {
    pub fn new(max_d: usize, seed: u64) -> Result<Self> {
        QuditDim::new(max_d)?;
        Ok(Self {
            max_d,
            seed,
            tolerances: Tolerances::default(),
            formula: fidelity_formula,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub module: &'static str,
    pub name: &'static str,
    pub d: usize,
    pub passed: bool,
    /// Worst error on success; the offending case on failure.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub max_d: usize,
    pub seed: u64,
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# teleclone verify max_d={} seed={}", self.max_d, self.seed);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag} d={} {}/{} {}", c.d, c.module, c.name, c.detail);
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "summary: {} passed, {} failed", self.checks.len() - failed, failed);
        out
    }
}

/// Tracks the worst observed error and the case that produced it.
struct Worst {
    err: f64,
    case: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            err: 0.0,
            case: String::new(),
        }
    }

    fn observe(&mut self, err: f64, case: impl FnOnce() -> String) {
        // NaN counts as worst
        if !(err <= self.err) {
            self.err = err;
            self.case = case();
        }
    }

    fn finish(self, module: &'static str, name: &'static str, d: usize, tol: f64) -> PropertyCheck {
        let passed = self.err <= tol;
        let detail = if passed {
            format!("max_err={:.3e} tol={:.1e}", self.err, tol)
        } else {
            format!("max_err={:.3e} tol={:.1e} at {}", self.err, tol, self.case)
        };
        PropertyCheck {
            module,
            name,
            d,
            passed,
            detail,
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
    format!("[{}]", parts.join(","))
}

fn random_state<R: Rng>(register: Register, rng: &mut R) -> StateVector {
    let amps = (0..register.total_dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::new(register, amps)
        .and_then(|s| s.normalized())
        .expect("random state has non-zero norm")
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    QuditDim::new(cfg.max_d)?;
    let mut report = VerifyReport {
        max_d: cfg.max_d,
        seed: cfg.seed,
        checks: Vec::new(),
    };
    for n in 2..=cfg.max_d {
        let d = QuditDim::new(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(n as u64));
        qudit_checks(d, cfg, &mut rng, &mut report.checks)?;
        cloning_checks(d, cfg, &mut rng, &mut report.checks)?;
        telecloning_checks(d, cfg, &mut rng, &mut report.checks)?;
        analysis_checks(d, cfg, &mut rng, &mut report.checks)?;
    }
    Ok(report)
}

fn qudit_checks(d: QuditDim, cfg: &VerifyConfig, rng: &mut ChaCha8Rng, out: &mut Vec<PropertyCheck>) -> Result<()> {
    let tol = cfg.tolerances;
    let n = d.get();
    let one = Register::uniform(d, 1);
    let two = Register::uniform(d, 2);
    let three = Register::uniform(d, 3);

    let mut w = Worst::new();
    for i in 0..RANDOM_STATES {
        let a = random_state(one.clone(), rng);
        let b = random_state(two.clone(), rng);
        let ab = tensor_product(&a, &b)?;
        w.observe((ab.norm_sqr() - 1.0).abs(), || format!("sample={i}"));
    }
    out.push(w.finish("qudit-core", "tensor_normalization", n, tol.norm));

    let mut w = Worst::new();
    for i in 0..RANDOM_STATES {
        let s = random_state(three.clone(), rng);
        let direct = s.partial_trace(&[0])?;
        let staged = s.partial_trace(&[0, 1])?.partial_trace(&[0])?;
        let rest = s.partial_trace(&[1, 2])?;
        let err = direct
            .distance(&staged)?
            .max((direct.trace() - 1.0).norm())
            .max((rest.trace() - 1.0).norm());
        w.observe(err, || format!("sample={i}"));
    }
    out.push(w.finish("qudit-core", "partial_trace_consistency", n, tol.norm));

    let mut w = Worst::new();
    let mut bounds = Worst::new();
    for i in 0..RANDOM_STATES {
        let s = random_state(two.clone(), rng);
        let sa = von_neumann_entropy(&s.partial_trace(&[0])?)?;
        let sb = von_neumann_entropy(&s.partial_trace(&[1])?)?;
        w.observe((sa - sb).abs(), || format!("sample={i}"));
        let max = d.as_f64().log2();
        for h in [sa, sb] {
            bounds.observe((-h).max(h - max).max(0.0), || format!("sample={i} entropy={h}"));
        }
    }
    out.push(w.finish("qudit-core", "schmidt_symmetry", n, tol.cross));
    out.push(bounds.finish("qudit-core", "entropy_bounds", n, tol.norm));

    let mut w = Worst::new();
    for i in 0..RANDOM_STATES {
        let psi = random_state(one.clone(), rng);
        let rho = random_state(two.clone(), rng).partial_trace(&[1])?;
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let err = (fidelity(&psi, &rho)? - fidelity(&psi.scale(phase), &rho)?).abs();
        w.observe(err, || format!("sample={i}"));
    }
    out.push(w.finish("qudit-core", "fidelity_phase_invariance", n, tol.norm));
    Ok(())
}

fn cloning_checks(d: QuditDim, cfg: &VerifyConfig, rng: &mut ChaCha8Rng, out: &mut Vec<PropertyCheck>) -> Result<()> {
    let tol = cfg.tolerances;
    let n = d.get();

    let mut iso = Worst::new();
    let mut sym = Worst::new();
    for i in 0..RANDOM_STATES {
        let input = random_state(Register::uniform(d, 1), rng);
        let clone = econ_clone(&input)?;
        iso.observe((clone.state.norm_sqr() - 1.0).abs(), || format!("sample={i}"));
        let r1 = clone.state.partial_trace(&[0])?;
        let r2 = clone.state.partial_trace(&[1])?;
        sym.observe(r1.distance(&r2)?, || format!("sample={i}"));
    }
    out.push(iso.finish("cloning", "isometry", n, tol.norm));
    out.push(sym.finish("cloning", "clone_symmetry", n, tol.norm));

    let target = econ_fidelity_analytic(d);
    let mut w = Worst::new();
    for _ in 0..CLONE_PHASES {
        let theta = PhaseVector::random(d, rng);
        let f = econ_clone(&phase_state(d, &theta)?)?.fidelity_each;
        w.observe((f - target).abs(), || format!("theta={}", fmt_vec(theta.as_slice())));
    }
    out.push(w.finish("cloning", "phase_covariance", n, tol.cross));

    let (econ, opt) = (econ_fidelity_analytic(d), opt_fidelity_analytic(d));
    let (passed, detail) = if n == 2 {
        let err = (econ - opt).abs();
        (err <= 1e-12, format!("|F_econ-F_opt|={err:.3e}"))
    } else {
        (econ < opt, format!("F_opt-F_econ={:.3e}", opt - econ))
    };
    out.push(PropertyCheck {
        module: "cloning",
        name: if n == 2 { "econ_equals_opt" } else { "econ_below_opt" },
        d: n,
        passed,
        detail,
    });
    Ok(())
}

fn telecloning_checks(d: QuditDim, cfg: &VerifyConfig, rng: &mut ChaCha8Rng, out: &mut Vec<PropertyCheck>) -> Result<()> {
    let tol = cfg.tolerances;
    let n = d.get();
    let uniform_p = 1.0 / (n * n) as f64;

    let mut channels = vec![ChannelAmplitudes::uniform(d), optimal_amplitudes(d), ChannelAmplitudes::product(d)];
    channels.extend((0..RANDOM_CHANNELS).map(|_| ChannelAmplitudes::random(d, rng)));

    let mut runs: Vec<ProtocolRun> = Vec::with_capacity(channels.len());
    for x in &channels {
        let theta = PhaseVector::random(d, rng);
        runs.push(run_protocol(&theta, x)?);
    }
    let case = |run: &ProtocolRun, o: Option<BellOutcome>| {
        let mut s = format!("x={} theta={}", fmt_vec(run.x.as_slice()), fmt_vec(run.theta.as_slice()));
        if let Some(o) = o {
            let _ = write!(s, " outcome=({},{})", o.l, o.k);
        }
        s
    };

    let mut uniformity = Worst::new();
    let mut completeness = Worst::new();
    let mut independence = Worst::new();
    let mut symmetry = Worst::new();
    let mut oracle = Worst::new();
    let mut entropy = Worst::new();
    let mut correction = Worst::new();
    for run in &runs {
        completeness.observe((run.total_probability() - 1.0).abs(), || case(run, None));
        let f0 = run.records[0].fidelity_b;
        for r in &run.records {
            uniformity.observe((r.probability - uniform_p).abs(), || case(run, Some(r.outcome)));
            independence.observe((r.fidelity_b - f0).abs(), || case(run, Some(r.outcome)));
            symmetry.observe((r.fidelity_b - r.fidelity_c).abs(), || case(run, Some(r.outcome)));
            let direct = expected_corrected_state(&run.theta, &run.x, r.outcome)?;
            let err = (1.0 - r.corrected_state.inner(&direct)?.norm()).max(0.0);
            correction.observe(err, || case(run, Some(r.outcome)));
        }
        oracle.observe((run.mean_fidelity - (cfg.formula)(run.x.as_slice())).abs(), || case(run, None));
        let rho = channel_state(&run.x).partial_trace(&[0])?;
        entropy.observe((channel_entropy(&run.x) - von_neumann_entropy(&rho)?).abs(), || case(run, None));
    }
    out.push(uniformity.finish("telecloning", "outcome_uniformity", n, tol.cross));
    out.push(completeness.finish("telecloning", "probability_sum", n, 1e-12));
    out.push(independence.finish("telecloning", "outcome_independence", n, tol.cross));
    out.push(symmetry.finish("telecloning", "clone_symmetry", n, tol.cross));
    out.push(oracle.finish("telecloning", "oracle_equivalence", n, tol.cross));
    out.push(entropy.finish("telecloning", "entropy_consistency", n, tol.cross));
    out.push(correction.finish("telecloning", "correction_correctness", n, tol.norm));

    let x = ChannelAmplitudes::random(d, rng);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..PROTOCOL_PHASES {
        let f = run_protocol(&PhaseVector::random(d, rng), &x)?.mean_fidelity;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let mut w = Worst::new();
    w.observe(hi - lo, || format!("x={}", fmt_vec(x.as_slice())));
    out.push(w.finish("telecloning", "phase_covariance", n, tol.cross));

    let mut w = Worst::new();
    let id = DMatrix::<Complex64>::identity(n, n);
    for o in BellOutcome::all(d) {
        let u = correction_unitary(d, o);
        w.observe((u.adjoint() * &u - &id).norm(), || format!("outcome=({},{})", o.l, o.k));
    }
    out.push(w.finish("telecloning", "unitarity", n, UNITARY_TOL));
    Ok(())
}

fn analysis_checks(d: QuditDim, cfg: &VerifyConfig, rng: &mut ChaCha8Rng, out: &mut Vec<PropertyCheck>) -> Result<()> {
    let tol = cfg.tolerances;
    let n = d.get();

    let r = maximize_fidelity(d, DEFAULT_RESTARTS, cfg.seed)?;
    let target = optimal_amplitudes(d);
    let f_err = (r.f_star - opt_fidelity_analytic(d)).abs();
    // tail entries are interchangeable, so compare sorted tails
    let mut tail: Vec<f64> = r.x_star.as_slice()[1..].to_vec();
    tail.sort_by(f64::total_cmp);
    let x_err = std::iter::once(r.x_star.as_slice()[0])
        .chain(tail)
        .zip(target.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(PropertyCheck {
        module: "analysis",
        name: "optimizer_agreement",
        d: n,
        passed: f_err <= OPTIMIZER_F_TOL && x_err <= OPTIMIZER_X_TOL,
        detail: format!(
            "f_err={f_err:.3e} x_err={x_err:.3e} converged={} x_star={}",
            r.converged,
            fmt_vec(r.x_star.as_slice())
        ),
    });

    let points = sweep_x0(d, DEFAULT_POINTS)?;
    let (max_s, max_f) = sweep_markers(d);
    let at_opt = points
        .iter()
        .min_by(|a, b| (a.x0 - max_f).abs().total_cmp(&(b.x0 - max_f).abs()))
        .ok_or_else(|| Error::InvalidArgument("empty sweep".into()))?;
    let mut w = Worst::new();
    w.observe((at_opt.fidelity - opt_fidelity_analytic(d)).abs(), || format!("x0={}", at_opt.x0));
    out.push(w.finish("analysis", "sweep_at_optimum", n, tol.cross));

    if n == 2 {
        let i = argmax_entropy(&points);
        let j = argmax_fidelity(&points);
        let shared = i.is_some() && i == j && i.is_some_and(|i| (points[i].x0 - max_s).abs() <= 1e-12);
        out.push(PropertyCheck {
            module: "analysis",
            name: "shared_argmax",
            d: n,
            passed: shared,
            detail: format!("entropy_argmax={:?} fidelity_argmax={:?}", i.map(|i| points[i].x0), j.map(|j| points[j].x0)),
        });
    } else {
        let w_pts = window(&points, max_s, max_f);
        let mut bad = None;
        for (i, pair) in w_pts.windows(2).enumerate() {
            if pair[1].fidelity < pair[0].fidelity || pair[1].entropy > pair[0].entropy {
                bad = Some((i, pair[0].x0, pair[1].x0));
                break;
            }
        }
        out.push(PropertyCheck {
            module: "analysis",
            name: "tradeoff_monotonicity",
            d: n,
            passed: bad.is_none() && w_pts.len() >= 2,
            detail: match bad {
                None => format!("points={}", w_pts.len()),
                Some((i, a, b)) => format!("points={} violation at step {i}: x0={a} -> {b}", w_pts.len()),
            },
        });
    }

    let mut w = Worst::new();
    for i in 0..RANDOM_STATES {
        let x = if i % 2 == 0 {
            symmetric_channel(d, rng.random_range(0.05..0.95))?
        } else {
            ChannelAmplitudes::random(d, rng)
        };
        let probe = x.as_slice().to_vec();
        let fd = central_difference(fidelity_formula, &probe, FD_STEP);
        let g = fidelity_gradient(&probe);
        let err = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-3))
            .fold(0.0, f64::max);
        w.observe(err, || format!("x={}", fmt_vec(&probe)));
    }
    out.push(w.finish("analysis", "gradient_check", n, FD_REL_TOL));
    Ok(())
}
