//! Direct integration of the closed characteristic system
//! `(F, G, lambda, D, r)`, used as ground truth for every bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundCurve, BoundFamily, Side};
use crate::dynamics::{
    evaluate_first_integral, first_integral_constant, j_exact_radial, rhs_divergence, rhs_radial,
    CharacteristicState, Dimension, PhasePoint, RadialProfile,
};
use crate::error::{domain, Result};
use crate::numerics::{integrate_lenient, Crossing, Event, OdeOptions, OdeTrajectory};
use crate::numerics::ode::StopReason;
use crate::spiral::{SigmaPair, Spiral};

const IF: usize = 0;
const IG: usize = 1;
const IL: usize = 2;
const ID: usize = 3;
const IR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub t_max: f64,
    pub tol: f64,
    /// Terminal guard on `|D|`.
    pub d_cap: f64,
    /// Samples with `|D|` above this enter the `1/D` fit.
    pub fit_threshold: f64,
    pub fit_samples: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { t_max: 100.0, tol: 1e-10, d_cap: 1e6, fit_threshold: 1e3, fit_samples: 20 }
    }
}

impl OracleOptions {
    pub fn new(t_max: f64, tol: f64) -> Self {
        Self { t_max, tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlowupMethod {
    Threshold,
    Extrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub detected: bool,
    pub t_star: Option<f64>,
    pub method: Option<BlowupMethod>,
}

impl BlowupRecord {
    pub const NONE: Self = Self { detected: false, t_star: None, method: None };
}

/// A `D = 0` crossing of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCrossing {
    pub t: f64,
    pub lambda: f64,
    /// `D` goes from positive to negative.
    pub falling: bool,
}

impl AxisCrossing {
    pub fn s(&self) -> f64 {
        self.lambda - 1.0
    }

    /// Falling at `lambda > 0` or rising at `lambda < 0`: the crossings of a
    /// clockwise turn about the origin.
    pub fn is_clockwise(&self) -> bool {
        (self.falling && self.lambda > 0.0) || (!self.falling && self.lambda < 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct CharacteristicRun {
    pub r0: f64,
    pub dim: Dimension,
    pub initial: CharacteristicState,
    pub trajectory: OdeTrajectory,
    pub crossings: Vec<AxisCrossing>,
    pub blowup: BlowupRecord,
    pub options: OracleOptions,
}

fn rhs(dim: Dimension) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |_t, y, dy| {
        let (f, g, lambda, d, r) = (y[IF], y[IG], y[IL], y[ID], y[IR]);
        let j = j_exact_radial(f, d, dim);
        let (dl, dd) = rhs_divergence(lambda, d, j);
        let (df, dg) = rhs_radial(f, g, dim);
        dy[IF] = df;
        dy[IG] = dg;
        dy[IL] = dl;
        dy[ID] = dd;
        dy[IR] = f * r;
    }
}

/// Integrates one characteristic from an explicit initial state.
pub fn run_state(
    initial: CharacteristicState,
    dim: Dimension,
    opts: OracleOptions,
) -> Result<CharacteristicRun> {
    if !(initial.lambda < 1.0) {
        return domain(format!("lambda0 = {} must be below 1", initial.lambda));
    }
    if !(opts.t_max > 0.0 && opts.tol > 0.0) {
        return domain("t_max and tol must be positive");
    }
    let y0 = [initial.f, initial.g, initial.lambda, initial.div_v, initial.r];
    let mut ode = OdeOptions::with_tol(opts.tol);
    ode.state_cap = 1e250;
    let d_cap = opts.d_cap;
    let events = [
        Event::new(|_t, y: &[f64]| y[ID], Crossing::Either, false),
        Event::new(move |_t, y: &[f64]| y[ID].abs() - d_cap, Crossing::Rising, true),
    ];
    let trajectory = integrate_lenient(rhs(dim), &y0, (0.0, opts.t_max), &ode, &events)?;
    let crossings = trajectory
        .events_of(0)
        .filter(|e| e.t > 0.0)
        .map(|e| AxisCrossing { t: e.t, lambda: e.y[IL], falling: !e.rising })
        .collect();
    let mut run = CharacteristicRun {
        r0: initial.r,
        dim,
        initial,
        trajectory,
        crossings,
        blowup: BlowupRecord::NONE,
        options: opts,
    };
    run.blowup = detect_blowup(&run);
    Ok(run)
}

/// Integrates the characteristic through `r0` of `profile`.
pub fn run_characteristic(profile: &RadialProfile, r0: f64, opts: OracleOptions) -> Result<CharacteristicRun> {
    run_state(profile.initial_state(r0)?, profile.dim, opts)
}

/// Estimates the blow-up time from samples of `D(t)`.
///
/// Requires the series to end below `-d_cap`. The zero of a straight line
/// fitted to `1/D` over the last `fit_samples` points with `|D| > threshold`
/// is the estimate; with fewer than two such points the Riccati asymptote
/// `t_end + 1/|D_end|` is used.
pub fn detect_blowup_series(
    t: &[f64],
    d: &[f64],
    d_cap: f64,
    threshold: f64,
    fit_samples: usize,
) -> BlowupRecord {
    let (Some(&t_end), Some(&d_end)) = (t.last(), d.last()) else {
        return BlowupRecord::NONE;
    };
    if !(d_end <= -d_cap * (1.0 - 1e-6)) {
        return BlowupRecord::NONE;
    }
    let idx: Vec<usize> = (0..t.len()).rev().take_while(|&i| d[i].abs() > threshold).take(fit_samples).collect();
    if idx.len() < 2 {
        return BlowupRecord {
            detected: true,
            t_star: Some(t_end + 1.0 / d_end.abs()),
            method: Some(BlowupMethod::Threshold),
        };
    }
    let n = idx.len() as f64;
    let (mut st, mut sw, mut stt, mut stw) = (0.0, 0.0, 0.0, 0.0);
    for &i in &idx {
        let x = t[i] - t_end;
        let w = 1.0 / d[i];
        st += x;
        sw += w;
        stt += x * x;
        stw += x * w;
    }
    let denom = n * stt - st * st;
    let slope = (n * stw - st * sw) / denom;
    let intercept = (sw - slope * st) / n;
    let t_star = t_end - intercept / slope;
    if !(slope < 0.0) || !t_star.is_finite() {
        return BlowupRecord {
            detected: true,
            t_star: Some(t_end + 1.0 / d_end.abs()),
            method: Some(BlowupMethod::Threshold),
        };
    }
    BlowupRecord { detected: true, t_star: Some(t_star), method: Some(BlowupMethod::Extrapolation) }
}

pub fn detect_blowup(run: &CharacteristicRun) -> BlowupRecord {
    let guard_hit = matches!(run.trajectory.stop, StopReason::TerminalEvent(_) | StopReason::StateCap | StopReason::StepUnderflow);
    if !guard_hit {
        return BlowupRecord::NONE;
    }
    let d: Vec<f64> = run.trajectory.y.iter().map(|y| y[ID]).collect();
    let o = run.options;
    detect_blowup_series(&run.trajectory.t, &d, o.d_cap, o.fit_threshold, o.fit_samples)
}

/// Full clockwise turns of the `(lambda, D)` projection.
pub fn count_revolutions_oracle(run: &CharacteristicRun) -> u32 {
    (run.crossings.iter().filter(|c| c.is_clockwise()).count() / 2) as u32
}

impl CharacteristicRun {
    pub fn state_at(&self, t: f64) -> CharacteristicState {
        let y = self.trajectory.eval(t);
        CharacteristicState { t, f: y[IF], g: y[IG], lambda: y[IL], div_v: y[ID], r: y[IR] }
    }

    pub fn states(&self) -> Vec<CharacteristicState> {
        self.trajectory
            .t
            .iter()
            .zip(&self.trajectory.y)
            .map(|(&t, y)| CharacteristicState { t, f: y[IF], g: y[IG], lambda: y[IL], div_v: y[ID], r: y[IR] })
            .collect()
    }

    /// Largest `|F|` over the recorded samples.
    pub fn max_abs_f(&self) -> f64 {
        self.trajectory.y.iter().map(|y| y[IF].abs()).fold(0.0, f64::max)
    }

    /// Time of the `k`-th clockwise crossing (1-based).
    pub fn crossing_time(&self, k: usize) -> Option<f64> {
        self.crossings.iter().filter(|c| c.is_clockwise()).nth(k.checked_sub(1)?).map(|c| c.t)
    }

    /// Time to complete `n` revolutions, measured from the start.
    ///
    /// For a start on the axis this is the `2n`-th crossing; otherwise the
    /// first return to the start angle after `2n` crossings is used.
    pub fn revolution_time(&self, n: u32) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        let t2n = self.crossing_time(2 * n as usize)?;
        if self.initial.div_v == 0.0 {
            return Some(t2n);
        }
        let (l0, d0) = (self.initial.lambda, self.initial.div_v);
        let angle0 = d0.atan2(l0);
        let ts = &self.trajectory.t;
        let mut prev: Option<(f64, f64)> = None;
        for (i, &t) in ts.iter().enumerate() {
            if t < t2n {
                continue;
            }
            let y = &self.trajectory.y[i];
            let a = unwrap_angle(y[ID].atan2(y[IL]) - angle0);
            if let Some((tp, ap)) = prev {
                if ap > 0.0 && a <= 0.0 && (ap - a) < std::f64::consts::PI {
                    let g = |t: f64| {
                        let s = self.trajectory.eval(t);
                        unwrap_angle(s[ID].atan2(s[IL]) - angle0)
                    };
                    return crate::numerics::find_root(g, tp, t, 1e-13).ok();
                }
            }
            prev = Some((t, a));
        }
        None
    }

    /// Mean spacing of consecutive falling crossings.
    pub fn measured_period(&self) -> Option<f64> {
        let ts: Vec<f64> = self.crossings.iter().filter(|c| c.falling).map(|c| c.t).collect();
        if ts.len() < 2 {
            return None;
        }
        Some((ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64)
    }

    /// `max |F^2 - Y(G)|` over the samples, `Y` being the first integral
    /// through the initial point.
    pub fn first_integral_drift(&self) -> Result<f64> {
        let c = first_integral_constant(self.initial.f, self.initial.g, self.dim)?;
        Ok(self
            .trajectory
            .y
            .iter()
            .map(|y| (y[IF] * y[IF] - evaluate_first_integral(y[IG], c)).abs())
            .fold(0.0, f64::max))
    }

    /// Smallest density `1 - lambda` over the samples.
    pub fn min_density(&self) -> f64 {
        self.trajectory.y.iter().map(|y| 1.0 - y[IL]).fold(f64::INFINITY, f64::min)
    }
}

fn unwrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub sigmas: SigmaPair,
    pub f_plus: f64,
    pub family: BoundFamily,
    pub arcs: usize,
    pub samples_per_arc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Largest exceedance of `Z = D^2` outside the bound pair, `0` if inside.
    pub max_violation: f64,
    pub per_arc: Vec<f64>,
}

/// Checks `Z = D^2` between consecutive crossings against the two curves
/// anchored at the earlier crossing.
pub fn sandwich_check(run: &CharacteristicRun, o: SandwichOptions) -> Result<SandwichReport> {
    let mut per_arc = Vec::new();
    for w in run.crossings.windows(2).take(o.arcs) {
        let (a, b) = (w[0], w[1]);
        let anchor = PhasePoint { s: a.s(), z: 0.0 };
        let z1 = BoundCurve::sigma(Side::Lower, anchor, o.sigmas.sigma1, o.f_plus, run.dim, o.family)?;
        let z2 = BoundCurve::sigma(Side::Upper, anchor, o.sigmas.sigma2, o.f_plus, run.dim, o.family)?;
        let n = o.samples_per_arc.max(3);
        let mut worst = 0.0f64;
        for i in 1..n - 1 {
            let t = a.t + (b.t - a.t) * i as f64 / (n - 1) as f64;
            let y = run.trajectory.eval(t);
            let s = y[IL] - 1.0;
            let z = y[ID] * y[ID];
            let (p, q) = (z1.eval(s), z2.eval(s));
            let (lo, hi) = (p.min(q), p.max(q));
            worst = worst.max(lo - z).max(z - hi);
        }
        per_arc.push(worst);
    }
    let max_violation = per_arc.iter().copied().fold(0.0, f64::max);
    Ok(SandwichReport { max_violation, per_arc })
}

/// Whether the oracle's `k`-th crossing lies between the `k`-th crossings of
/// the inner and outer spirals, for each `k` where all three exist.
pub fn crossings_bracketed(run: &CharacteristicRun, inner: &Spiral, outer: &Spiral, k_max: usize) -> Vec<bool> {
    run.crossings
        .iter()
        .zip(&inner.crossings)
        .zip(&outer.crossings)
        .take(k_max)
        .map(|((c, &si), &so)| {
            let s = c.s();
            let (lo, hi) = (si.min(so), si.max(so));
            lo - 1e-12 <= s && s <= hi + 1e-12
        })
        .collect()
}

/// `0` plus `n` log-uniform radii on `(0, r_max]`.
pub fn default_sweep_grid() -> Vec<f64> {
    log_grid(4.0, 60)
}

pub fn log_grid(r_max: f64, n: usize) -> Vec<f64> {
    let lo = (r_max * 1e-3).ln();
    let hi = r_max.ln();
    let mut g = vec![0.0];
    g.extend((0..n).map(|i| (lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64).exp()));
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r0: f64,
    pub t_star: Option<f64>,
    pub revolutions: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub min_t_star: Option<f64>,
    pub r_at_min: Option<f64>,
    pub points: Vec<SweepPoint>,
}

/// Blow-up time at every radius of `grid`, in parallel.
pub fn min_blowup_sweep(profile: &RadialProfile, grid: &[f64], opts: OracleOptions) -> Result<SweepResult> {
    if grid.is_empty() {
        return domain("empty radius grid");
    }
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&r0| {
            let run = run_characteristic(profile, r0, opts)?;
            Ok(SweepPoint { r0, t_star: run.blowup.t_star, revolutions: count_revolutions_oracle(&run) })
        })
        .collect::<Result<_>>()?;
    let best = points
        .iter()
        .filter_map(|p| p.t_star.map(|t| (t, p.r0)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(SweepResult { min_t_star: best.map(|b| b.0), r_at_min: best.map(|b| b.1), points })
}
