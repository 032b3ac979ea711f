//! Entropy/fidelity sweeps along the symmetric channel family and a
//! numerical maximizer of the telecloned fidelity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qudit::{QuditDim, TAU_OPT};
use crate::telecloning::{channel_entropy, fidelity_analytic, fidelity_formula, fidelity_gradient, optimal_xy, ChannelAmplitudes};

/// Lower end of the sweep grid.
pub const SWEEP_EPSILON: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_SEED: u64 = 42;

/// Grid points closer than this to an analytic marker are treated as the marker.
const MARKER_MERGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x0: f64,
    pub entropy: f64,
    pub fidelity: f64,
}

/// `x_0` given, `x_1 = … = x_{d-1} = √((1 - x_0²)/(d - 1))`.
pub fn symmetric_channel(d: QuditDim, x0: f64) -> Result<ChannelAmplitudes> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::InvalidArgument(format!("x0 must lie in [0, 1], got {x0}")));
    }
    let rest = ((1.0 - x0 * x0).max(0.0) / (d.as_f64() - 1.0)).sqrt();
    let mut x = vec![rest; d.get()];
    x[0] = x0;
    ChannelAmplitudes::new(x)
}

/// The two analytic markers: entropy maximum `1/√d` and fidelity maximum `X(d)`.
pub fn sweep_markers(d: QuditDim) -> (f64, f64) {
    (1.0 / d.as_f64().sqrt(), optimal_xy(d).0)
}

/// Evaluates entropy and fidelity on a uniform `x_0` grid over `[ε, 1]`,
/// with the analytic markers inserted in sorted position.
pub fn sweep_x0(d: QuditDim, n_points: usize) -> Result<Vec<SweepPoint>> {
    if n_points < 3 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 3 points, got {n_points}")));
    }
    let step = (1.0 - SWEEP_EPSILON) / (n_points - 1) as f64;
    let mut grid: Vec<f64> = (0..n_points).map(|i| SWEEP_EPSILON + step * i as f64).collect();
    // the last point must be exactly 1
    grid[n_points - 1] = 1.0;
    let (max_entropy, max_fidelity) = sweep_markers(d);
    for marker in [max_entropy, max_fidelity] {
        if !grid.iter().any(|g| (g - marker).abs() <= MARKER_MERGE) {
            grid.push(marker);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.into_iter()
        .map(|x0| {
            let x = symmetric_channel(d, x0)?;
            Ok(SweepPoint {
                x0,
                entropy: channel_entropy(&x),
                fidelity: fidelity_analytic(&x),
            })
        })
        .collect()
}

fn argmax_by(points: &[SweepPoint], key: impl Fn(&SweepPoint) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let v = key(p);
        // strict comparison: ties keep the smaller x0
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the highest-fidelity point; ties go to the smallest `x_0`.
pub fn argmax_fidelity(points: &[SweepPoint]) -> Option<usize> {
    argmax_by(points, |p| p.fidelity)
}

/// Index of the highest-entropy point; ties go to the smallest `x_0`.
pub fn argmax_entropy(points: &[SweepPoint]) -> Option<usize> {
    argmax_by(points, |p| p.entropy)
}

/// Points with `lo ≤ x_0 ≤ hi`, in grid order.
pub fn window(points: &[SweepPoint], lo: f64, hi: f64) -> Vec<SweepPoint> {
    points
        .iter()
        .copied()
        .filter(|p| p.x0 >= lo - MARKER_MERGE && p.x0 <= hi + MARKER_MERGE)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub max_iter: usize,
    /// Stop once a step improves the objective by less than this...
    pub tol: f64,
    /// ...and moves no entry by more than this.
    pub step_tol: f64,
    pub initial_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: TAU_OPT,
            step_tol: 1e-8,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub x_star: ChannelAmplitudes,
    pub f_star: f64,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Clamp to the non-negative orthant, then back onto the unit sphere.
fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.max(0.0);
    }
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

fn ascend(mut x: Vec<f64>, settings: &OptimizerSettings) -> (Vec<f64>, f64, usize, bool) {
    const MAX_STEP: f64 = 1e3;
    const MIN_STEP: f64 = 1e-16;
    const ARMIJO: f64 = 1e-4;

    project(&mut x);
    let mut f = fidelity_formula(&x);
    let mut eta = settings.initial_step;
    for iter in 1..=settings.max_iter {
        // tangent component of the gradient at x on the sphere
        let mut g = fidelity_gradient(&x);
        let radial: f64 = g.iter().zip(&x).map(|(gi, xi)| gi * xi).sum();
        for (gi, xi) in g.iter_mut().zip(&x) {
            *gi -= radial * xi;
        }
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        let (cand, fc) = loop {
            let mut cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + eta * gi).collect();
            project(&mut cand);
            let fc = fidelity_formula(&cand);
            if fc >= f + ARMIJO * eta * g_sq {
                break (cand, fc);
            }
            eta *= 0.5;
            if eta < MIN_STEP {
                break (x.clone(), f);
            }
        };
        let improvement = fc - f;
        let step = x.iter().zip(&cand).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = cand;
        f = fc;
        if improvement < settings.tol && step < settings.step_tol {
            return (x, f, iter, true);
        }
        eta = (eta * 2.0).clamp(MIN_STEP, MAX_STEP);
    }
    (x, f, settings.max_iter, false)
}

/// Multi-start projected gradient ascent of the telecloned fidelity over
/// the non-negative unit sphere.
pub fn maximize_fidelity(d: QuditDim, restarts: usize, seed: u64) -> Result<OptimizationResult> {
    maximize_fidelity_with(d, restarts, seed, &OptimizerSettings::default())
}

pub fn maximize_fidelity_with(
    d: QuditDim,
    restarts: usize,
    seed: u64,
    settings: &OptimizerSettings,
) -> Result<OptimizationResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let mut best: Option<OptimizationResult> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        // strictly interior start
        let start: Vec<f64> = (0..d.get()).map(|_| rng.random_range(0.05..1.0)).collect();
        let (x, f, iterations, converged) = ascend(start, settings);
        if best.as_ref().is_none_or(|b| f > b.f_star) {
            best = Some(OptimizationResult {
                x_star: ChannelAmplitudes::normalize(x)?,
                f_star: f,
                iterations,
                converged,
                restart,
            });
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
