//! Gaussian-pulse thresholds: the `F+(lambda0)` map, the `lambda1`/`lambda2`
//! self-maps, their fixed points and the first-period classifier.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bounds::{anchor_root_s1, anchor_root_s2};
use crate::dynamics::Dimension;
use crate::error::{domain, Error, Result};
use crate::numerics::{find_root, lambert_w, optimize_scalar, Extremum, WBranch};

const SCAN_POINTS: usize = 1000;
const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseScenario {
    /// Amplitude `K` of `G0(r) = K exp(-r^2)`.
    pub k_pulse: f64,
}

impl PulseScenario {
    pub fn new(k_pulse: f64) -> Result<Self> {
        if !(k_pulse > 0.0) || !k_pulse.is_finite() {
            return domain(format!("pulse amplitude must be positive, got {k_pulse}"));
        }
        if !(2.0 * k_pulse < 1.0) {
            return domain(format!("lambda0 = 2K = {} must stay below 1", 2.0 * k_pulse));
        }
        Ok(Self { k_pulse })
    }

    pub fn lambda0_at_origin(&self) -> f64 {
        2.0 * self.k_pulse
    }
}

/// `(1 - lambda0) exp(lambda0 / (1 - lambda0))`.
fn pulse_exponential(lambda0: f64) -> f64 {
    (1.0 - lambda0) * (lambda0 / (1.0 - lambda0)).exp()
}

/// `F+^2 = ((1 - lambda0) e^{lambda0/(1-lambda0)} - 1) / 2`, the squared
/// amplitude of `F` on the axis orbit through `G = lambda0 / 2`, `F = 0`.
pub fn f_plus_sq_of_lambda0(lambda0: f64) -> Result<f64> {
    if !(lambda0 < 1.0) || !lambda0.is_finite() {
        return domain(format!("lambda0 must be below 1, got {lambda0}"));
    }
    Ok(((pulse_exponential(lambda0) - 1.0) / 2.0).max(0.0))
}

pub fn f_plus_of_lambda0(lambda0: f64) -> Result<f64> {
    Ok(f_plus_sq_of_lambda0(lambda0)?.sqrt())
}

/// Maximiser of `Y` on the axis orbit through `G = lambda0 / 2`.
pub fn pulse_orbit_maximiser(lambda0: f64) -> Result<f64> {
    if !(lambda0 < 1.0) {
        return domain(format!("lambda0 must be below 1, got {lambda0}"));
    }
    let c = 1.0 / (lambda0 - 1.0) - ((1.0 - lambda0) / 2.0).ln();
    Ok(0.5 - (-c - 1.0).exp())
}

fn check_lambda(lambda0: f64) -> Result<()> {
    if !(lambda0 < 1.0) || !lambda0.is_finite() {
        return domain(format!("lambda0 must be below 1, got {lambda0}"));
    }
    Ok(())
}

/// `(1 + 4 sigma^2 - (2 sigma^2 + 1)(1 - lambda0) e^{lambda0/(1-lambda0)}) / (4 sigma^2 (sigma^2 + 1))`.
pub fn lambda1_map(lambda0: f64, sigma1: f64) -> Result<f64> {
    check_lambda(lambda0)?;
    if !(sigma1 > 0.0) {
        return domain(format!("sigma1 must be positive, got {sigma1}"));
    }
    let s2 = sigma1 * sigma1;
    Ok((1.0 + 4.0 * s2 - (2.0 * s2 + 1.0) * pulse_exponential(lambda0)) / (4.0 * s2 * (s2 + 1.0)))
}

/// `S2(F+(lambda0), sigma2) + 1`.
pub fn lambda2_map(lambda0: f64, sigma2: f64) -> Result<f64> {
    check_lambda(lambda0)?;
    if !(sigma2 > 0.0 && sigma2 < 1.0) {
        return domain(format!("sigma2 must lie in (0, 1), got {sigma2}"));
    }
    let s2 = sigma2 * sigma2;
    if (2.0 * s2 - 1.0).abs() < 1e-12 {
        return Err(Error::SingularSigma(sigma2));
    }
    let e = pulse_exponential(lambda0);
    Ok((2.0 * s2 - 1.0) * (0.5 * (e - 1.0) * (2.0 * s2 + 1.0) - s2 * s2) / (2.0 * s2 * (s2 - 1.0))
        + 1.0)
}

/// Same maps evaluated through the anchor roots `S1`, `S2` and `F+`.
pub fn lambda1_via_anchor(lambda0: f64, sigma1: f64) -> Result<f64> {
    Ok(anchor_root_s1(sigma1, f_plus_of_lambda0(lambda0)?, Dimension::TWO)? + 1.0)
}

pub fn lambda2_via_anchor(lambda0: f64, sigma2: f64) -> Result<f64> {
    Ok(anchor_root_s2(sigma2, f_plus_of_lambda0(lambda0)?, Dimension::TWO)? + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseMap {
    Lambda1,
    Lambda2,
}

impl PulseMap {
    pub fn eval(self, lambda0: f64, sigma: f64) -> Result<f64> {
        match self {
            PulseMap::Lambda1 => lambda1_map(lambda0, sigma),
            PulseMap::Lambda2 => lambda2_map(lambda0, sigma),
        }
    }

    /// Coefficients of `c e^{y-1} = m y + q`, `y = 1/(1 - lambda)`, whose
    /// roots are the fixed points of the map.
    fn lambert_coefficients(self, sigma: f64) -> (f64, f64, f64) {
        let s2 = sigma * sigma;
        match self {
            PulseMap::Lambda1 => {
                (2.0 * s2 + 1.0, 1.0 - 4.0 * s2 * s2, 4.0 * s2 * (s2 + 1.0))
            }
            PulseMap::Lambda2 => {
                let p = (2.0 * s2 - 1.0) / (2.0 * s2 * (s2 - 1.0));
                (p * (2.0 * s2 + 1.0) / 2.0, p * ((2.0 * s2 + 1.0) / 2.0 + s2 * s2), -1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointMethod {
    LambertClosedForm,
    DirectRootFind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub sigma: f64,
    pub lambda_star: f64,
    pub method: FixedPointMethod,
    /// `|lambda* - map(lambda*)|`.
    pub residual: f64,
    /// Lambert closed form on the branch closest to `lambda_star`, if real.
    pub lambert: Option<f64>,
    pub lambert_branch: Option<i32>,
    /// `|lambert - lambda_star|`, reported when above `1e-8`.
    pub discrepancy: Option<f64>,
}

/// Root of `c e^{y-1} = m y + q` on one Lambert branch, mapped to `lambda = 1 - 1/y`.
pub fn lambert_fixed_point(c: f64, m: f64, q: f64, branch: WBranch) -> Result<f64> {
    if c == 0.0 || m == 0.0 {
        return domain("degenerate Lambert coefficients");
    }
    let arg = -(c / m) * (-q / m - 1.0).exp();
    let z = -lambert_w(branch, arg)?;
    let y = z - q / m;
    Ok(1.0 - 1.0 / y)
}

/// Closed form of `lambda1*`:
/// `L = W_k(e^{(4 sigma^2 + 1)/(4 sigma^4 - 1)} / (2 sigma^2 - 1))`,
/// `lambda1* = ((4 sigma^4 - 1) L - 4 sigma^2 - 1) / ((4 sigma^4 - 1) L - 4 sigma^2 (1 + sigma^2))`,
/// with `k = -1` for `sigma < 1/sqrt 2` and `k = 0` above.
pub fn lambda1_star_lambert(sigma: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    let a = 4.0 * s2 * s2 - 1.0;
    if a == 0.0 {
        return Err(Error::SingularSigma(sigma));
    }
    let branch = if s2 < 0.5 { WBranch::Lower } else { WBranch::Principal };
    let l = lambert_w(branch, ((4.0 * s2 + 1.0) / a).exp() / (2.0 * s2 - 1.0))?;
    Ok((a * l - 4.0 * s2 - 1.0) / (a * l - 4.0 * s2 * (1.0 + s2)))
}

/// Fixed point of `lambda1` or `lambda2` in `(0, 1)`.
///
/// The bracket comes from a scan of `lambda - map(lambda)` over a fixed grid;
/// the first sign change is refined by Brent's method. The Lambert form is
/// evaluated on both branches as an independent cross-check.
pub fn fixed_point(which: PulseMap, sigma: f64) -> Result<FixedPointResult> {
    // validate sigma for the map
    which.eval(0.5, sigma)?;
    let g = |l: f64| l - which.eval(l, sigma).unwrap_or(f64::NAN);
    let step = (SCAN_HI - SCAN_LO) / (SCAN_POINTS - 1) as f64;
    let mut prev_x = SCAN_LO;
    let mut prev_g = g(prev_x);
    let mut bracket = None;
    for i in 1..SCAN_POINTS {
        let x = SCAN_LO + step * i as f64;
        let gx = g(x);
        if prev_g == 0.0 {
            bracket = Some((prev_x, prev_x));
            break;
        }
        if prev_g.signum() != gx.signum() && gx.is_finite() && prev_g.is_finite() {
            bracket = Some((prev_x, x));
            break;
        }
        prev_x = x;
        prev_g = gx;
    }
    let (a, b) = bracket.ok_or_else(|| {
        Error::NoFixedPoint(format!("{which:?} at sigma = {sigma} has no fixed point in (0, 1)"))
    })?;
    let lambda_star = if a == b { a } else { find_root(g, a, b, 1e-15)? };
    let residual = g(lambda_star).abs();

    let (c, m, q) = which.lambert_coefficients(sigma);
    let mut best: Option<(f64, i32)> = None;
    for br in [WBranch::Principal, WBranch::Lower] {
        if let Ok(l) = lambert_fixed_point(c, m, q, br) {
            if l.is_finite() && best.map_or(true, |(v, _)| (l - lambda_star).abs() < (v - lambda_star).abs()) {
                best = Some((l, br.k()));
            }
        }
    }
    let discrepancy = best.map(|(l, _)| (l - lambda_star).abs()).filter(|d| *d > 1e-8);
    Ok(FixedPointResult {
        sigma,
        lambda_star,
        method: FixedPointMethod::DirectRootFind,
        residual,
        lambert: best.map(|b| b.0),
        lambert_branch: best.map(|b| b.1),
        discrepancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub sigma1: f64,
    pub lambda1: f64,
    pub sigma2: f64,
    pub lambda2: f64,
}

impl Thresholds {
    /// Pulse amplitude below which the first period is smooth.
    pub fn k_smooth(&self) -> f64 {
        0.5 * self.lambda1
    }

    /// Pulse amplitude above which breaking occurs within the first period.
    pub fn k_blowup(&self) -> f64 {
        0.5 * self.lambda2
    }
}

fn star(which: PulseMap, sigma: f64) -> f64 {
    fixed_point(which, sigma).map(|r| r.lambda_star).unwrap_or(f64::NAN)
}

fn compute_thresholds() -> Thresholds {
    let inv_sqrt2 = 0.5f64.sqrt();
    let (sigma1, lambda1) =
        optimize_scalar(|s| star(PulseMap::Lambda1, s), 0.2, inv_sqrt2 - 1e-3, 1e-10, Extremum::Max);
    let (sigma2, lambda2) =
        optimize_scalar(|s| star(PulseMap::Lambda2, s), inv_sqrt2 + 1e-3, 1.0 - 1e-3, 1e-10, Extremum::Min);
    Thresholds { sigma1, lambda1, sigma2, lambda2 }
}

/// `(sigma1, Lambda1)` maximising `lambda1*` and `(sigma2, Lambda2)`
/// minimising `lambda2*`; computed once per process.
pub fn optimize_thresholds() -> Thresholds {
    static CACHE: OnceLock<Thresholds> = OnceLock::new();
    *CACHE.get_or_init(compute_thresholds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseVerdict {
    SmoothFirstPeriod,
    BlowUpFirstPeriod,
    Indeterminate,
}

pub fn classify_pulse(k_pulse: f64) -> Result<PulseVerdict> {
    PulseScenario::new(k_pulse).or_else(|e| {
        // amplitudes with 2K >= 1 are still classifiable
        if k_pulse > 0.0 && k_pulse.is_finite() {
            Ok(PulseScenario { k_pulse })
        } else {
            Err(e)
        }
    })?;
    let th = optimize_thresholds();
    Ok(if k_pulse < th.k_smooth() {
        PulseVerdict::SmoothFirstPeriod
    } else if k_pulse > th.k_blowup() {
        PulseVerdict::BlowUpFirstPeriod
    } else {
        PulseVerdict::Indeterminate
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbit_extremes;

    #[test]
    fn f_plus_limits_and_value() {
        assert!(f_plus_of_lambda0(1e-8).unwrap() < 1e-7);
        let fp = f_plus_of_lambda0(0.2).unwrap();
        assert!((fp - 0.1167).abs() < 5e-5);
        let ext = orbit_extremes(0.0, 0.1, Dimension::TWO).unwrap();
        assert!((fp - ext.f_plus).abs() < 1e-6);
        assert!((pulse_orbit_maximiser(0.2).unwrap() - ext.g_max).abs() < 1e-6);
        assert!(f_plus_of_lambda0(1.0).is_err());
    }

    #[test]
    fn f_plus_increasing() {
        let mut prev = 0.0;
        for i in 1..100 {
            let v = f_plus_of_lambda0(i as f64 / 100.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn lambda1_at_zero() {
        for sigma in [0.3, 0.5032, 0.9] {
            let s2: f64 = sigma * sigma;
            let v = lambda1_map(0.0, sigma).unwrap();
            assert!((v - 1.0 / (2.0 * (s2 + 1.0))).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda2_at_zero() {
        let sigma: f64 = 0.9;
        let s2 = sigma * sigma;
        let v = lambda2_map(0.0, sigma).unwrap();
        let expect = (2.0 * s2 - 1.0) * (-s2 * s2) / (2.0 * s2 * (s2 - 1.0)) + 1.0;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - (anchor_root_s2(sigma, 0.0, Dimension::TWO).unwrap() + 1.0)).abs() < 1e-15);
        assert!(lambda2_map(0.3, 0.5f64.sqrt()).is_err());
    }

    #[test]
    fn two_route_identity() {
        for i in 0..50 {
            let l = 0.01 + 0.98 * i as f64 / 49.0;
            for sigma in [0.4, 0.5032, 0.8] {
                let a = lambda1_map(l, sigma).unwrap();
                let b = lambda1_via_anchor(l, sigma).unwrap();
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{l} {sigma}");
            }
            for sigma in [0.75, 0.9423, 0.99] {
                let a = lambda2_map(l, sigma).unwrap();
                let b = lambda2_via_anchor(l, sigma).unwrap();
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{l} {sigma}");
            }
        }
    }

    #[test]
    fn fixed_points() {
        let r = fixed_point(PulseMap::Lambda1, 0.5032).unwrap();
        assert!((r.lambda_star - 0.3058).abs() < 5e-4);
        assert!(r.residual < 1e-10);
        assert!(r.discrepancy.is_none(), "{r:?}");
        let closed = lambda1_star_lambert(0.5032).unwrap();
        assert!((closed - r.lambda_star).abs() < 1e-10);

        let r = fixed_point(PulseMap::Lambda2, 0.9423).unwrap();
        assert!((r.lambda_star - 0.5754).abs() < 5e-4);
        assert!(r.residual < 1e-10 && r.discrepancy.is_none());

        assert!(matches!(fixed_point(PulseMap::Lambda2, 0.5), Err(Error::NoFixedPoint(_))));
    }

    #[test]
    fn thresholds() {
        let th = optimize_thresholds();
        assert!((th.sigma1 - 0.5032).abs() < 5e-4, "{th:?}");
        assert!((th.lambda1 - 0.3058).abs() < 5e-4);
        assert!((th.sigma2 - 0.9423).abs() < 5e-4);
        assert!((th.lambda2 - 0.5754).abs() < 5e-4);
        for ds in [-1e-2, 1e-2] {
            assert!(star(PulseMap::Lambda1, th.sigma1 + ds) <= th.lambda1);
            assert!(star(PulseMap::Lambda2, th.sigma2 + ds) >= th.lambda2);
        }
        assert_eq!(th.k_smooth(), th.lambda1 / 2.0);
    }

    #[test]
    fn classifier() {
        assert_eq!(classify_pulse(0.15).unwrap(), PulseVerdict::SmoothFirstPeriod);
        assert_eq!(classify_pulse(0.29).unwrap(), PulseVerdict::BlowUpFirstPeriod);
        assert_eq!(classify_pulse(0.222).unwrap(), PulseVerdict::Indeterminate);
        assert!(classify_pulse(-1.0).is_err());
    }
}
