//! Compound spirals built from alternating bound arcs, revolution counting
//! and the lifetime integrals `T_l`, `T_L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundCurve, BoundFamily, Side};
use crate::dynamics::{orbit_extremes, Dimension, PhasePoint, RadialProfile};
use crate::error::{domain, Result};
use crate::numerics::{integrate_adaptive, march_to_root, QuadOptions, SingularEnds};
use crate::pulse::f_plus_of_lambda0;

const ROOT_TOL: f64 = 1e-15;
const MARCH_H0: f64 = 1e-5;
const MARCH_H_MAX: f64 = 1e-2;
const LOWER_LIMIT: f64 = -100.0;
const COLLAPSE_PROBE: f64 = 1e-10;
const PLOT_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpiralKind {
    /// `L`: `sqrt(Z2)` above the axis, `-sqrt(Z1)` below.
    Outer,
    /// `l`: `sqrt(Z1)` above the axis, `-sqrt(Z2)` below.
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FplusRule {
    /// Orbit invariant, kept fixed on every arc.
    OrbitConstant(f64),
    /// `F+(lambda)` of the axis orbit through each new crossing.
    PulseMap,
}

impl FplusRule {
    fn at(self, lambda: f64) -> Result<f64> {
        match self {
            FplusRule::OrbitConstant(f) => Ok(f),
            FplusRule::PulseMap => f_plus_of_lambda0(lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPair {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for SigmaPair {
    fn default() -> Self {
        Self { sigma1: 0.5032, sigma2: 0.9423 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Half {
    /// `D > 0`, `s` increasing.
    UpperD,
    /// `D < 0`, `s` decreasing.
    LowerD,
}

impl Half {
    fn direction(self) -> f64 {
        match self {
            Half::UpperD => 1.0,
            Half::LowerD => -1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Half::UpperD => Half::LowerD,
            Half::LowerD => Half::UpperD,
        }
    }

    fn sign(self) -> f64 {
        self.direction()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpiralStop {
    MaxRevolutions,
    /// Lower bound curve does not return to the axis.
    Unbounded,
    /// Arc reaches `s = 0`.
    Vacuum,
    NoRoot,
    Equilibrium,
    /// Two consecutive arcs of zero length: the spiral has stalled on the axis.
    Collapsed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpiralSegment {
    pub half: Half,
    pub curve: BoundCurve,
    pub f_plus: f64,
    pub s_start: f64,
    pub s_end: f64,
    /// Curve is non-positive just past its anchor; the arc has zero length.
    pub collapsed: bool,
    /// Time `int ds / (|s| sqrt Z)` along the arc.
    pub time: f64,
}

impl SpiralSegment {
    pub fn d_at(&self, s: f64) -> f64 {
        self.half.sign() * self.curve.eval(s).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralConfig {
    pub kind: SpiralKind,
    pub fplus_rule: FplusRule,
    pub sigmas: SigmaPair,
    pub dim: Dimension,
    pub family: BoundFamily,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spiral {
    pub config: SpiralConfig,
    /// `(lambda0, D0)`.
    pub start: (f64, f64),
    pub segments: Vec<SpiralSegment>,
    /// Axis crossings as `s` values, in order.
    pub crossings: Vec<f64>,
    pub revolutions: u32,
    pub stop: SpiralStop,
}

/// Revolutions certified by a number of axis crossings after the start.
pub fn count_revolutions(crossings: usize) -> u32 {
    (crossings / 2) as u32
}

fn arc_curve(cfg: &SpiralConfig, half: Half, anchor: PhasePoint, f_plus: f64) -> Result<BoundCurve> {
    let use_lower = matches!(
        (cfg.kind, half),
        (SpiralKind::Outer, Half::LowerD) | (SpiralKind::Inner, Half::UpperD)
    );
    let (side, sigma) = if use_lower {
        (Side::Lower, cfg.sigmas.sigma1)
    } else {
        (Side::Upper, cfg.sigmas.sigma2)
    };
    BoundCurve::sigma(side, anchor, sigma, f_plus, cfg.dim, cfg.family)
}

fn arc_time(curve: &BoundCurve, a: f64, b: f64, ends: SingularEnds) -> Result<f64> {
    arc_time_with(curve, a, b, ends, QuadOptions::default())
}

fn arc_time_with(curve: &BoundCurve, a: f64, b: f64, ends: SingularEnds, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let ends = if a < b { ends } else { SingularEnds { left: ends.right, right: ends.left } };
    let z_near = |end: f64, delta: f64| curve.increment(end, delta);
    let g = |s: f64, z: f64| 1.0 / (s.abs() * z.abs().max(1e-300).sqrt());
    let m = 0.5 * (lo + hi);
    let w = (m - lo).sqrt();
    let left = if ends.left {
        integrate_adaptive(|u| 2.0 * u * g(lo + u * u, z_near(lo, u * u)), 0.0, w, opts)?
    } else {
        integrate_adaptive(|s| g(s, curve.eval(s)), lo, m, opts)?
    };
    let right = if ends.right {
        integrate_adaptive(|u| 2.0 * u * g(hi - u * u, z_near(hi, -u * u)), 0.0, w, opts)?
    } else {
        integrate_adaptive(|s| g(s, curve.eval(s)), m, hi, opts)?
    };
    Ok(left + right)
}

enum ArcEnd {
    Root(f64),
    Collapsed,
    Missing,
}

fn arc_end(curve: &BoundCurve, half: Half) -> ArcEnd {
    let s0 = curve.anchor.s;
    let dir = half.direction();
    let mut probe = s0 + dir * COLLAPSE_PROBE;
    if curve.anchor.z == 0.0 {
        if curve.eval(probe) <= 0.0 {
            return ArcEnd::Collapsed;
        }
    } else {
        probe = s0;
    }
    let limit = match half {
        Half::LowerD => LOWER_LIMIT,
        Half::UpperD => 0.0,
    };
    match march_to_root(|s| curve.eval(s), probe, dir, MARCH_H0, MARCH_H_MAX, limit, ROOT_TOL) {
        Some(r) if r < 0.0 => ArcEnd::Root(r),
        _ => ArcEnd::Missing,
    }
}

/// Builds the compound spiral from `(lambda0, D0)`.
///
/// Arcs alternate halves; each ends at the next root of its curve, which
/// becomes the anchor `(s, 0)` of the following arc. Construction stops
/// after `max_rev` revolutions, when the lower arc of the outer spiral has
/// `C1 >= 0`, or when a curve fails to return to the axis.
pub fn build_spiral(
    kind: SpiralKind,
    start: (f64, f64),
    fplus_rule: FplusRule,
    sigmas: SigmaPair,
    dim: Dimension,
    max_rev: u32,
    family: BoundFamily,
) -> Result<Spiral> {
    let (lambda0, d0) = start;
    if !(lambda0 < 1.0) || !lambda0.is_finite() || !d0.is_finite() {
        return domain(format!("start must satisfy lambda0 < 1, got ({lambda0}, {d0})"));
    }
    let config = SpiralConfig { kind, fplus_rule, sigmas, dim, family };
    let mut spiral = Spiral {
        config,
        start,
        segments: Vec::new(),
        crossings: Vec::new(),
        revolutions: 0,
        stop: SpiralStop::MaxRevolutions,
    };
    let mut f_plus = fplus_rule.at(lambda0)?;
    if lambda0 == 0.0 && d0 == 0.0 && f_plus == 0.0 {
        spiral.stop = SpiralStop::Equilibrium;
        return Ok(spiral);
    }
    let mut half = if d0 < 0.0 || (d0 == 0.0 && lambda0 >= 0.0) { Half::LowerD } else { Half::UpperD };
    let mut anchor = PhasePoint::from_divergences(lambda0, d0);
    let max_arcs = 2 * max_rev as usize;
    while spiral.crossings.len() < max_arcs {
        let curve = arc_curve(&config, half, anchor, f_plus)?;
        if kind == SpiralKind::Outer && half == Half::LowerD && curve.coef >= 0.0 {
            spiral.stop = SpiralStop::Unbounded;
            break;
        }
        let (end, collapsed) = match arc_end(&curve, half) {
            ArcEnd::Root(r) => (r, false),
            ArcEnd::Collapsed => (anchor.s, true),
            ArcEnd::Missing => {
                spiral.stop = match half {
                    Half::UpperD => SpiralStop::Vacuum,
                    Half::LowerD => SpiralStop::NoRoot,
                };
                break;
            }
        };
        let ends = SingularEnds { left: anchor.z == 0.0, right: true };
        let time = if collapsed { 0.0 } else { arc_time(&curve, anchor.s, end, ends)? };
        spiral.segments.push(SpiralSegment {
            half,
            curve,
            f_plus,
            s_start: anchor.s,
            s_end: end,
            collapsed,
            time,
        });
        spiral.crossings.push(end);
        let stalled = collapsed && spiral.segments.iter().rev().nth(1).is_some_and(|p| p.collapsed);
        if stalled {
            spiral.stop = SpiralStop::Collapsed;
            break;
        }
        anchor = PhasePoint { s: end, z: 0.0 };
        f_plus = fplus_rule.at(end + 1.0)?;
        half = half.flip();
    }
    spiral.revolutions = count_revolutions(spiral.crossings.len());
    Ok(spiral)
}

impl Spiral {
    pub fn kind(&self) -> SpiralKind {
        self.config.kind
    }

    /// Time to complete `n` revolutions along the spiral.
    ///
    /// Sums the first `2n` arcs; for starts off the axis the partial arc from
    /// the `2n`-th crossing back to `s0` is added. Returns `None` when the
    /// spiral has fewer than `2n` arcs.
    pub fn time_through(&self, n: u32) -> Result<Option<f64>> {
        let arcs = 2 * n as usize;
        if self.segments.len() < arcs {
            return Ok(None);
        }
        let mut t: f64 = self.segments[..arcs].iter().map(|s| s.time).sum();
        let (lambda0, d0) = self.start;
        if d0 != 0.0 && n > 0 {
            t += self.closing_time(arcs, lambda0 - 1.0)?;
        }
        Ok(Some(t))
    }

    fn closing_time(&self, arcs: usize, s0: f64) -> Result<f64> {
        let anchor_s = self.crossings[arcs - 1];
        let half = self.segments[0].half;
        let f_plus = self.config.fplus_rule.at(anchor_s + 1.0)?;
        let curve = arc_curve(&self.config, half, PhasePoint { s: anchor_s, z: 0.0 }, f_plus)?;
        let toward_start = (s0 - anchor_s) * half.direction() > 0.0;
        let end = match arc_end(&curve, half) {
            ArcEnd::Collapsed => return Ok(0.0),
            ArcEnd::Root(r) if !toward_start || (r - anchor_s).abs() < (s0 - anchor_s).abs() => {
                return arc_time(&curve, anchor_s, r, SingularEnds::BOTH)
            }
            _ if toward_start => s0,
            _ => return Ok(0.0),
        };
        arc_time(&curve, anchor_s, end, SingularEnds::LEFT)
    }

    /// Samples `(s, t, lambda, D)` along every arc, `per_segment` points each,
    /// with `t` measured from the start.
    pub fn polyline(&self, per_segment: usize) -> Result<Vec<SpiralSample>> {
        let mut out = Vec::new();
        let mut t0 = 0.0;
        let per_segment = per_segment.max(2);
        for seg in &self.segments {
            if seg.collapsed {
                out.push(SpiralSample { s: seg.s_start, t: t0, lambda: seg.s_start + 1.0, d: 0.0 });
                continue;
            }
            let mut t = t0;
            let mut prev = seg.s_start;
            for i in 0..per_segment {
                let s = seg.s_start + (seg.s_end - seg.s_start) * i as f64 / (per_segment - 1) as f64;
                if i > 0 {
                    let left = i == 1 && seg.curve.anchor.z == 0.0;
                    let right = i == per_segment - 1;
                    t += arc_time_with(&seg.curve, prev, s, SingularEnds { left, right }, PLOT_QUAD)?;
                }
                let d = if i == 0 && seg.curve.anchor.z > 0.0 {
                    seg.half.sign() * seg.curve.anchor.z.sqrt()
                } else if i == 0 || i == per_segment - 1 {
                    0.0
                } else {
                    seg.d_at(s)
                };
                out.push(SpiralSample { s, t, lambda: s + 1.0, d });
                prev = s;
            }
            t0 = t;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralSample {
    pub s: f64,
    pub t: f64,
    pub lambda: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeEstimate {
    /// `T_l`, along the inner spiral.
    pub t_lower: f64,
    /// `T_L`, along the outer spiral.
    pub t_upper: f64,
    pub revolutions: u32,
}

/// `T_l` and `T_L` for the revolutions certified by the outer spiral.
///
/// Arcs missing from the inner spiral (it may stop or collapse first)
/// contribute nothing to `T_l`.
pub fn lifetime(inner: &Spiral, outer: &Spiral) -> Result<LifetimeEstimate> {
    if inner.start != outer.start {
        return domain("spirals must share the start point");
    }
    let n = outer.revolutions;
    let t_upper = outer.time_through(n)?.unwrap_or(f64::NAN);
    let t_lower = match inner.time_through(n)? {
        Some(t) => t,
        None => inner.segments.iter().map(|s| s.time).sum(),
    };
    Ok(LifetimeEstimate { t_lower, t_upper, revolutions: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldLifetime {
    /// `inf T_l` over the grid; `+inf` when every point is at rest.
    pub t_lower: f64,
    pub r_min: Option<f64>,
    pub revolutions: u32,
}

/// Lifetime estimate at one characteristic, `None` at equilibrium points.
pub fn point_lifetime(
    profile: &RadialProfile,
    r0: f64,
    sigmas: SigmaPair,
    max_rev: u32,
    family: BoundFamily,
) -> Result<Option<LifetimeEstimate>> {
    let state = profile.initial_state(r0)?;
    if state.f == 0.0 && state.g == 0.0 && state.lambda == 0.0 && state.div_v == 0.0 {
        return Ok(None);
    }
    let f_plus = orbit_extremes(state.f, state.g, profile.dim)?.f_plus;
    let rule = FplusRule::OrbitConstant(f_plus);
    let start = (state.lambda, state.div_v);
    let outer = build_spiral(SpiralKind::Outer, start, rule, sigmas, profile.dim, max_rev, family)?;
    let inner = build_spiral(SpiralKind::Inner, start, rule, sigmas, profile.dim, max_rev, family)?;
    lifetime(&inner, &outer).map(Some)
}

/// `inf T_l(r0)` over `r_grid`, evaluated in parallel.
pub fn guaranteed_field_lifetime(
    profile: &RadialProfile,
    r_grid: &[f64],
    sigmas: SigmaPair,
    max_rev: u32,
    family: BoundFamily,
) -> Result<FieldLifetime> {
    if r_grid.is_empty() {
        return domain("empty radius grid");
    }
    let per_point: Vec<Option<LifetimeEstimate>> = r_grid
        .par_iter()
        .map(|&r| point_lifetime(profile, r, sigmas, max_rev, family))
        .collect::<Result<_>>()?;
    let mut best = FieldLifetime { t_lower: f64::INFINITY, r_min: None, revolutions: max_rev };
    for (&r, est) in r_grid.iter().zip(per_point) {
        if let Some(e) = est {
            if e.t_lower < best.t_lower || best.r_min.is_none() && e.t_lower == best.t_lower {
                best = FieldLifetime { t_lower: e.t_lower, r_min: Some(r), revolutions: e.revolutions };
            }
        }
    }
    Ok(best)
}
