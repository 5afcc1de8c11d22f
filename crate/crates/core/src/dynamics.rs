//! Characteristic systems, radial first integrals, orbit extremes and periods.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{find_root, integrate_adaptive, march_to_root, optimize_scalar, Extremum, QuadOptions};

/// Spatial dimension of the radially symmetric problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub const ONE: Dimension = Dimension(1);
    pub const TWO: Dimension = Dimension(2);
    pub const THREE: Dimension = Dimension(3);

    pub fn new(d: u32) -> Result<Self> {
        match d {
            1..=3 => Ok(Dimension(d)),
            _ => domain(format!("dimension must be 1, 2 or 3, got {d}")),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn is_logarithmic(self) -> bool {
        self.0 == 2
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State carried along one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicState {
    pub t: f64,
    pub lambda: f64,
    /// Divergence of the velocity.
    pub div_v: f64,
    pub f: f64,
    pub g: f64,
    pub r: f64,
}

impl CharacteristicState {
    /// Density `n = 1 - lambda`.
    pub fn density(&self) -> f64 {
        1.0 - self.lambda
    }

    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint::from_divergences(self.lambda, self.div_v)
    }

    /// State on the axis, where `lambda = d G` and `div_v = d F`.
    pub fn on_axis(f: f64, g: f64, dim: Dimension) -> Self {
        let d = dim.as_f64();
        Self { t: 0.0, lambda: d * g, div_v: d * f, f, g, r: 0.0 }
    }
}

/// Point of the `(s, Z)` plane, `s = lambda - 1`, `Z = div_v^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub z: f64,
}

impl PhasePoint {
    pub fn new(s: f64, z: f64) -> Result<Self> {
        if !(s <= 0.0) || !(z >= 0.0) {
            return domain(format!("phase point needs s <= 0 and Z >= 0, got ({s}, {z})"));
        }
        Ok(Self { s, z })
    }

    pub fn from_divergences(lambda: f64, div_v: f64) -> Self {
        Self { s: lambda - 1.0, z: div_v * div_v }
    }

    pub fn lambda(&self) -> f64 {
        self.s + 1.0
    }
}

/// `(d lambda/dt, d div_v/dt)` for given `J`.
pub fn rhs_divergence(lambda: f64, div_v: f64, j: f64) -> (f64, f64) {
    (div_v * (1.0 - lambda), -div_v * div_v + 2.0 * j - lambda)
}

/// `(dF/dt, dG/dt)` of the radial factor system.
pub fn rhs_radial(f: f64, g: f64, dim: Dimension) -> (f64, f64) {
    (-f * f - g, f - dim.as_f64() * f * g)
}

/// Sum of principal 2x2 minors of the velocity Jacobian for radial flow.
pub fn j_exact_radial(f: f64, div_v: f64, dim: Dimension) -> f64 {
    let d = dim.as_f64();
    (d - 1.0) * f * div_v - (d - 1.0) * d * f * f / 2.0
}

/// Constant of the `(G, F^2)` first integral through a given point.
///
/// The anchor `(f0, g0)` is kept so that `Y` can be evaluated relative to it,
/// which avoids cancellation on small orbits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralConstant {
    pub c: f64,
    pub dim: Dimension,
    pub f0: f64,
    pub g0: f64,
}

pub fn first_integral_constant(f0: f64, g0: f64, dim: Dimension) -> Result<FirstIntegralConstant> {
    let d = dim.as_f64();
    let u = 1.0 - d * g0;
    if u == 0.0 {
        return Err(Error::Degenerate(format!("1 - d G0 = 0 at G0 = {g0} (zero density)")));
    }
    if !(f0.is_finite() && g0.is_finite()) {
        return domain("non-finite initial point");
    }
    let c = if dim.is_logarithmic() {
        (1.0 + 2.0 * f0 * f0) / (2.0 * g0 - 1.0) - u.abs().ln()
    } else {
        (1.0 - 2.0 * g0 + (d - 2.0) * f0 * f0) / ((d - 2.0) * u.abs().powf(2.0 / d))
    };
    Ok(FirstIntegralConstant { c, dim, f0, g0 })
}

/// `x - (1 + x) ln(1 + x)`.
fn log_remainder(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut sum = 0.0;
        let mut xn = x;
        for n in 2..12 {
            xn *= x;
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * xn / (n * (n - 1)) as f64;
        }
        sum
    } else {
        x - (1.0 + x) * x.ln_1p()
    }
}

/// `(1 + x)^p - 1 - p x`.
fn power_remainder(x: f64, p: f64) -> f64 {
    if x.abs() < 1e-3 {
        let mut sum = 0.0;
        let mut coef = p;
        let mut xn = x;
        for n in 2..10 {
            coef *= (p - (n - 1) as f64) / n as f64;
            xn *= x;
            sum += coef * xn;
        }
        sum
    } else {
        (p * x.ln_1p()).exp_m1() - p * x
    }
}

/// `Y(G) = F^2` along the orbit with constant `c`.
pub fn evaluate_first_integral(g: f64, c: FirstIntegralConstant) -> f64 {
    let d = c.dim.as_f64();
    let u0 = 1.0 - d * c.g0;
    let x = d * (c.g0 - g) / u0;
    if 1.0 + x <= 0.0 {
        // across the zero-density line: fall back to the closed form
        let u = 1.0 - d * g;
        return if c.dim.is_logarithmic() {
            0.5 * ((2.0 * g - 1.0) * u.abs().ln() + c.c * (2.0 * g - 1.0) - 1.0)
        } else {
            (2.0 * g - 1.0) / (d - 2.0) + c.c * u.abs().powf(2.0 / d)
        };
    }
    first_integral_in_x(x, c)
}

/// `Y(g0 + delta)`, accurate for `delta` far below the resolution of `g0`.
pub fn first_integral_at_offset(delta: f64, c: FirstIntegralConstant) -> f64 {
    let d = c.dim.as_f64();
    let x = -d * delta / (1.0 - d * c.g0);
    if 1.0 + x <= 0.0 {
        return evaluate_first_integral(c.g0 + delta, c);
    }
    first_integral_in_x(x, c)
}

fn first_integral_in_x(x: f64, c: FirstIntegralConstant) -> f64 {
    let d = c.dim.as_f64();
    let u0 = 1.0 - d * c.g0;
    let f2 = c.f0 * c.f0;
    if c.dim.is_logarithmic() {
        0.5 * u0 * log_remainder(x) + c.g0 * x + f2 * (1.0 + x)
    } else {
        let p = 2.0 / d;
        let rho_p = (p * x.ln_1p()).exp();
        ((1.0 - 2.0 * c.g0) * power_remainder(x, p) + p * x * (d - 2.0) * c.g0) / (d - 2.0)
            + f2 * rho_p
    }
}

/// Closed-form maximiser of `Y` on `G < 1/d`, if one exists.
pub fn first_integral_maximiser(c: FirstIntegralConstant) -> Option<f64> {
    let d = c.dim.as_f64();
    match c.dim.get() {
        2 => Some(0.5 * (1.0 - (-c.c - 1.0).exp())),
        _ => {
            // 1 - dG = ((d - 2) C)^{d/(d-2)}
            let base = (d - 2.0) * c.c;
            if base <= 0.0 {
                return None;
            }
            let u = base.powf(d / (d - 2.0));
            Some((1.0 - u) / d)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitExtremes {
    pub g_minus: f64,
    pub g_plus: f64,
    pub f_plus: f64,
    /// Location of the maximum of `Y`, where `|F| = f_plus`.
    pub g_max: f64,
}

/// Orbit through the origin-point `(0, 0)` collapses to a point.
fn is_point_orbit(f0: f64, g0: f64) -> bool {
    f0 == 0.0 && g0 == 0.0
}

pub fn orbit_extremes(f0: f64, g0: f64, dim: Dimension) -> Result<OrbitExtremes> {
    if is_point_orbit(f0, g0) {
        return Ok(OrbitExtremes { g_minus: 0.0, g_plus: 0.0, f_plus: 0.0, g_max: 0.0 });
    }
    let d = dim.as_f64();
    if !(g0 < 1.0 / d) {
        return domain(format!("G0 = {g0} is not below 1/d"));
    }
    let c = first_integral_constant(f0, g0, dim)?;
    let y = |g: f64| evaluate_first_integral(g, c);
    let gm0 = first_integral_maximiser(c)
        .filter(|g| *g < 1.0 / d)
        .ok_or_else(|| Error::Degenerate(format!("orbit through ({f0}, {g0}) is not closed")))?;
    if !(y(gm0) > 0.0) {
        return Err(Error::Degenerate(format!("orbit through ({f0}, {g0}) has no interior")));
    }
    let tol = 1e-15;
    let g_plus = march_to_root(y, gm0, 1.0, 1e-6, 0.02, 1.0 / d, tol)
        .ok_or_else(|| Error::Degenerate("no upper turning point".into()))?;
    let g_minus = march_to_root(y, gm0, -1.0, 1e-6, 0.05, -1e6, tol)
        .ok_or_else(|| Error::Degenerate("no lower turning point".into()))?;
    let (g_max, y_max) = optimize_scalar(y, g_minus, g_plus, 1e-12, Extremum::Max);
    Ok(OrbitExtremes { g_minus, g_plus, f_plus: y_max.max(0.0).sqrt(), g_max })
}

/// Period of the `(F, G)` oscillation through `(f0, g0)`.
pub fn period(f0: f64, g0: f64, dim: Dimension) -> Result<f64> {
    period_with(f0, g0, dim, QuadOptions::default())
}

pub fn period_with(f0: f64, g0: f64, dim: Dimension, opts: QuadOptions) -> Result<f64> {
    if is_point_orbit(f0, g0) {
        return Err(Error::Degenerate("equilibrium has no period".into()));
    }
    let ext = orbit_extremes(f0, g0, dim)?;
    let d = dim.as_f64();
    let (a, b) = (ext.g_minus, ext.g_plus);
    // each half is integrated from its turning point with `G = end -+ u^2`
    let ca = first_integral_constant(0.0, a, dim)?;
    let cb = first_integral_constant(0.0, b, dim)?;
    let w = (0.5 * (b - a)).sqrt();
    let left = integrate_adaptive(
        |u| {
            let delta = u * u;
            2.0 * u / ((1.0 - d * (a + delta)) * first_integral_at_offset(delta, ca).abs().max(1e-300).sqrt())
        },
        0.0,
        w,
        opts,
    )?;
    let right = integrate_adaptive(
        |u| {
            let delta = u * u;
            2.0 * u / ((1.0 - d * (b - delta)) * first_integral_at_offset(-delta, cb).abs().max(1e-300).sqrt())
        },
        0.0,
        w,
        opts,
    )?;
    Ok(2.0 * (left + right))
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum ProfileShape {
    Gaussian { k: f64 },
    Constant { f0: f64, g0: f64 },
    Custom { f0: ScalarFn, g0: ScalarFn },
}

/// Initial radial data `v = F0(r) r`, `E = G0(r) r`.
#[derive(Clone)]
pub struct RadialProfile {
    shape: ProfileShape,
    pub dim: Dimension,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            ProfileShape::Gaussian { k } => write!(f, "RadialProfile::Gaussian(K = {k}, d = {})", self.dim),
            ProfileShape::Constant { f0, g0 } => {
                write!(f, "RadialProfile::Constant(F0 = {f0}, G0 = {g0}, d = {})", self.dim)
            }
            ProfileShape::Custom { .. } => write!(f, "RadialProfile::Custom(d = {})", self.dim),
        }
    }
}

/// Radii used for the admissibility check when no grid is given.
pub fn default_admissibility_grid() -> Vec<f64> {
    (0..=800).map(|i| 8.0 * i as f64 / 800.0).collect()
}

fn central_difference(f: &dyn Fn(f64) -> f64, r: f64) -> f64 {
    let h = 1e-6 * r.abs().max(1.0);
    if r - h < 0.0 {
        // one-sided at the axis
        (-3.0 * f(r) + 4.0 * f(r + h) - f(r + 2.0 * h)) / (2.0 * h)
    } else {
        (f(r + h) - f(r - h)) / (2.0 * h)
    }
}

impl RadialProfile {
    /// Gaussian pulse `G0 = K exp(-r^2)`, `F0 = 0`, `d = 2`.
    pub fn gaussian(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return domain(format!("pulse amplitude K must be positive, got {k}"));
        }
        let p = Self { shape: ProfileShape::Gaussian { k }, dim: Dimension::TWO };
        p.check_admissible(&default_admissibility_grid())?;
        Ok(p)
    }

    /// Spatially constant factors (affine solution).
    pub fn constant(f0: f64, g0: f64, dim: Dimension) -> Result<Self> {
        let p = Self { shape: ProfileShape::Constant { f0, g0 }, dim };
        p.check_admissible(&[0.0])?;
        Ok(p)
    }

    /// Arbitrary smooth factors; derivatives by central differences.
    pub fn from_fns(
        f0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dim: Dimension,
        grid: &[f64],
    ) -> Result<Self> {
        let p = Self { shape: ProfileShape::Custom { f0: Arc::new(f0), g0: Arc::new(g0) }, dim };
        p.check_admissible(grid)?;
        Ok(p)
    }

    pub fn zero(dim: Dimension) -> Self {
        Self { shape: ProfileShape::Constant { f0: 0.0, g0: 0.0 }, dim }
    }

    pub fn pulse_amplitude(&self) -> Option<f64> {
        match self.shape {
            ProfileShape::Gaussian { k } => Some(k),
            _ => None,
        }
    }

    pub fn f0(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Gaussian { .. } => 0.0,
            ProfileShape::Constant { f0, .. } => *f0,
            ProfileShape::Custom { f0, .. } => f0(r),
        }
    }

    pub fn g0(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Gaussian { k } => k * (-r * r).exp(),
            ProfileShape::Constant { g0, .. } => *g0,
            ProfileShape::Custom { g0, .. } => g0(r),
        }
    }

    pub fn f0_prime(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Gaussian { .. } | ProfileShape::Constant { .. } => 0.0,
            ProfileShape::Custom { f0, .. } => central_difference(f0.as_ref(), r),
        }
    }

    pub fn g0_prime(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Gaussian { k } => -2.0 * k * r * (-r * r).exp(),
            ProfileShape::Constant { .. } => 0.0,
            ProfileShape::Custom { g0, .. } => central_difference(g0.as_ref(), r),
        }
    }

    pub fn lambda0(&self, r: f64) -> f64 {
        self.dim.as_f64() * self.g0(r) + self.g0_prime(r) * r
    }

    pub fn div_v0(&self, r: f64) -> f64 {
        self.dim.as_f64() * self.f0(r) + self.f0_prime(r) * r
    }

    /// Rejects profiles whose initial density `1 - lambda0` is not positive on `grid`.
    pub fn check_admissible(&self, grid: &[f64]) -> Result<()> {
        for &r in grid {
            let l = self.lambda0(r);
            if !(l < 1.0) {
                return domain(format!("initial density 1 - lambda0 = {} <= 0 at r = {r}", 1.0 - l));
            }
        }
        Ok(())
    }

    /// Characteristic state at `t = 0` starting from radius `r0`.
    pub fn initial_state(&self, r0: f64) -> Result<CharacteristicState> {
        let (lambda, div_v) = profile_divergences(self, r0)?;
        Ok(CharacteristicState { t: 0.0, lambda, div_v, f: self.f0(r0), g: self.g0(r0), r: r0 })
    }
}

pub fn gaussian_profile(k: f64) -> Result<RadialProfile> {
    RadialProfile::gaussian(k)
}

/// `(lambda0, div_v0)` of the profile at `r0`.
pub fn profile_divergences(p: &RadialProfile, r0: f64) -> Result<(f64, f64)> {
    if !(r0 >= 0.0) {
        return domain(format!("radius must be non-negative, got {r0}"));
    }
    Ok((p.lambda0(r0), p.div_v0(r0)))
}

/// Roots of `Y` on either side of `start` by a fixed-step sign scan; used to
/// cross-check [`orbit_extremes`].
pub fn turning_points_by_scan(c: FirstIntegralConstant, start: f64, step: f64) -> Result<(f64, f64)> {
    let y = |g: f64| evaluate_first_integral(g, c);
    let upper = 1.0 / c.dim.as_f64();
    let scan = |dir: f64| -> Result<f64> {
        let mut x = start;
        loop {
            let next = x + dir * step;
            if next >= upper || next < -1e3 {
                return Err(Error::Degenerate("scan left the phase domain".into()));
            }
            if y(next) <= 0.0 {
                return find_root(y, x.min(next), x.max(next), 1e-15);
            }
            x = next;
        }
    };
    Ok((scan(-1.0)?, scan(1.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn period_against_reference_integration() {
        // independent RK45 at rtol 1e-12: spacing of F = 0 falling crossings
        let p = period(0.0, 0.1, Dimension::TWO).unwrap();
        assert!((p - 6.276_156_32).abs() < 1e-7, "{p}");
    }

    #[test]
    fn divergence_rhs_examples() {
        assert_eq!(rhs_divergence(0.0, 0.0, 0.0), (0.0, 0.0));
        assert_eq!(rhs_divergence(0.2, 0.0, 0.0), (0.0, -0.2));
    }

    #[test]
    fn radial_rhs_examples() {
        assert_eq!(rhs_radial(0.0, 0.0, Dimension::TWO), (0.0, 0.0));
        assert_eq!(rhs_radial(0.0, 0.1, Dimension::TWO), (-0.1, 0.0));
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_exact_radial(0.7, -1.3, Dimension::ONE), 0.0);
        assert_eq!(j_exact_radial(1.0, 2.0, Dimension::TWO), 1.0);
        // affine 3D: div_v = 3 alpha gives J = 3 alpha^2
        let a = 0.37;
        assert!((j_exact_radial(a, 3.0 * a, Dimension::THREE) - 3.0 * a * a).abs() < 1e-15);
    }

    #[test]
    fn dimension_validation() {
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(4).is_err());
        assert_eq!(Dimension::new(3).unwrap(), Dimension::THREE);
    }

    #[test]
    fn trivial_orbit_constant() {
        let c = first_integral_constant(0.0, 0.0, Dimension::TWO).unwrap();
        assert!(evaluate_first_integral(0.0, c).abs() < 1e-15);
    }

    #[test]
    fn affine_3d_constant() {
        let (alpha, beta) = (0.2, 0.1);
        let c = first_integral_constant(alpha, beta, Dimension::THREE).unwrap();
        let k = (1.0 - 2.0 * beta + alpha * alpha) / (1.0 - 3.0 * beta).abs().powf(2.0 / 3.0);
        assert!((c.c - k).abs() < 1e-14);
    }

    #[test]
    fn degenerate_constant() {
        assert!(matches!(
            first_integral_constant(0.1, 0.5, Dimension::TWO),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn turning_points_of_pulse_orbit() {
        let ext = orbit_extremes(0.0, 0.1, Dimension::TWO).unwrap();
        let c = first_integral_constant(0.0, 0.1, Dimension::TWO).unwrap();
        assert!(evaluate_first_integral(ext.g_minus, c).abs() < 1e-14);
        assert!(evaluate_first_integral(ext.g_plus, c).abs() < 1e-14);
        assert!(ext.g_minus < 0.0 && (ext.g_plus - 0.1).abs() < 1e-12);
        assert!((ext.f_plus - 0.1167).abs() < 5e-5, "{}", ext.f_plus);
        let (lo, hi) = turning_points_by_scan(c, ext.g_max, 1e-4).unwrap();
        assert!((lo - ext.g_minus).abs() < 1e-9);
        assert!((hi - ext.g_plus).abs() < 1e-9);
    }

    #[test]
    fn maximiser_closed_form() {
        for (f0, g0) in [(0.0, 0.1), (0.05, -0.1), (0.2, 0.0)] {
            let ext = orbit_extremes(f0, g0, Dimension::TWO).unwrap();
            let c = first_integral_constant(f0, g0, Dimension::TWO).unwrap();
            let gm = first_integral_maximiser(c).unwrap();
            assert!((ext.g_max - gm).abs() < 1e-6);
        }
    }

    #[test]
    fn point_orbit() {
        let ext = orbit_extremes(0.0, 0.0, Dimension::THREE).unwrap();
        assert_eq!((ext.g_minus, ext.g_plus, ext.f_plus), (0.0, 0.0, 0.0));
        assert!(period(0.0, 0.0, Dimension::TWO).is_err());
    }

    #[test]
    fn small_orbit_period() {
        for d in [Dimension::ONE, Dimension::TWO, Dimension::THREE] {
            let t = period(0.0, 1e-4, d).unwrap();
            assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-3, "d = {d}: {t}");
        }
    }

    #[test]
    fn period_refinement_converges() {
        let mut prev = None::<f64>;
        for tol in [1e-6, 1e-9, 1e-12] {
            let o = QuadOptions { abs_tol: tol, rel_tol: tol, max_subdivisions: 4000 };
            let t = period_with(0.0, 0.1, Dimension::TWO, o).unwrap();
            if let Some(p) = prev {
                assert!((t - p).abs() < 100.0 * tol.max(1e-12) + 1e-5);
            }
            prev = Some(t);
        }
    }

    #[test]
    fn gaussian_divergences() {
        let p = gaussian_profile(0.1).unwrap();
        assert_eq!(profile_divergences(&p, 0.0).unwrap(), (0.2, 0.0));
        assert!(p.lambda0(1.0).abs() < 1e-16);
        for r in [0.3, 0.8, 1.7] {
            let exact = 0.2 * (1.0 - r * r) * (-r * r as f64).exp();
            assert!((p.lambda0(r) - exact).abs() < 1e-15);
        }
        assert!(gaussian_profile(0.0).is_err());
        assert!(gaussian_profile(0.6).is_err());
    }

    #[test]
    fn custom_profile_derivatives() {
        let p = RadialProfile::from_fns(
            |r: f64| 0.1 * r.sin(),
            |r: f64| 0.2 * (-r * r).exp(),
            Dimension::TWO,
            &default_admissibility_grid(),
        )
        .unwrap();
        let g = gaussian_profile(0.2).unwrap();
        for r in [0.0, 0.4, 1.3, 2.5] {
            assert!((p.g0_prime(r) - g.g0_prime(r)).abs() < 1e-6);
            assert!((p.f0_prime(r) - 0.1 * r.cos()).abs() < 1e-6);
        }
        assert!(profile_divergences(&p, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn first_integral_round_trip(f0 in -0.8f64..0.8, g0 in -2.0f64..0.3, d in 1u32..=3) {
            let dim = Dimension::new(d).unwrap();
            prop_assume!((1.0 - dim.as_f64() * g0).abs() > 1e-3);
            let c = first_integral_constant(f0, g0, dim).unwrap();
            let y = evaluate_first_integral(g0, c);
            prop_assert!((y - f0 * f0).abs() < 1e-12 * (1.0 + f0 * f0 + c.c.abs()));
        }

        #[test]
        fn gaussian_derivative_matches_difference(r in 0.0f64..4.0, k in 0.01f64..0.49) {
            let p = gaussian_profile(k).unwrap();
            let h = 1e-6 * r.max(1.0);
            let fd = (p.g0(r + h) - p.g0((r - h).max(0.0))) / (r + h - (r - h).max(0.0));
            prop_assert!((fd - p.g0_prime(r)).abs() < 1e-6);
        }
    }
}
