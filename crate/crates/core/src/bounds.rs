//! Closed-form comparison curves `Z(s)` and pointwise sufficient criteria.
//!
//! Every comparison equation here has the shape
//! `dZ/ds = 2 (alpha Z + s + beta s^2 + gamma) / s`, whose general solution
//! is `Z = c |s|^{2 alpha} + q2 s^2 + q1 s + q0`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Dimension, PhasePoint};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Plain,
    Irrotational,
    RadialSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `Z1`, from the lower estimate of the right-hand side.
    Lower,
    /// `Z2`, from the upper estimate of the right-hand side.
    Upper,
}

/// Which constant enters the lower radial curve.
///
/// `Printed` uses `(d-1)^2 F+^2 / sigma^2`; `Corrected` uses
/// `K = (d-1)(d(sigma^2+1)-1) F+^2 / sigma^2`, the bound that follows from
/// `dZ/ds = 2(Z + s + 1 - 2J)/s`. The upper curve is the same in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundFamily {
    #[default]
    Printed,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCase {
    pub kind: BoundKind,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundParams {
    Plain { xi30: f64 },
    Irrotational,
    Sigma { sigma: f64, f_plus: f64, dim: Dimension, family: BoundFamily },
}

/// Coefficients `(alpha, beta, gamma)` of a comparison equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOde {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ComparisonOde {
    pub fn rhs(&self, s: f64, z: f64) -> f64 {
        2.0 * (self.alpha * z + s + self.beta * s * s + self.gamma) / s
    }
}

/// `K = (d-1)(d(sigma^2+1)-1) F+^2 / sigma^2`.
pub fn k_bound(sigma: f64, f_plus: f64, dim: Dimension) -> f64 {
    let d = dim.as_f64();
    let s2 = sigma * sigma;
    (d - 1.0) * (d * (s2 + 1.0) - 1.0) * f_plus * f_plus / s2
}

fn check_sigma(side: Side, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if side == Side::Upper {
        let s2 = sigma * sigma;
        if (s2 - 1.0).abs() < 1e-12 || (2.0 * s2 - 1.0).abs() < 1e-12 {
            return Err(Error::SingularSigma(sigma));
        }
    }
    Ok(())
}

/// Right-hand side of the comparison equation for a case.
pub fn comparison_ode(case: BoundCase, params: &BoundParams, s0: f64) -> Result<ComparisonOde> {
    match (case.kind, params) {
        (BoundKind::Plain, BoundParams::Plain { xi30 }) => {
            if case.side != Side::Lower {
                return domain("plain oscillations only have the lower curve");
            }
            if !(s0 < 0.0) {
                return domain(format!("anchor must satisfy s0 < 0, got {s0}"));
            }
            let c3 = xi30 / s0;
            Ok(ComparisonOde { alpha: 2.0, beta: c3 * c3, gamma: 1.0 })
        }
        (BoundKind::Irrotational, BoundParams::Irrotational) => {
            if case.side != Side::Lower {
                return domain("irrotational oscillations only have the lower curve");
            }
            Ok(ComparisonOde { alpha: 2.0, beta: 0.0, gamma: 1.0 })
        }
        (BoundKind::RadialSigma, BoundParams::Sigma { sigma, f_plus, dim, family }) => {
            check_sigma(case.side, *sigma)?;
            let s2 = sigma * sigma;
            let d = dim.as_f64();
            match case.side {
                Side::Lower => {
                    let a = match family {
                        BoundFamily::Printed => (d - 1.0).powi(2) * f_plus * f_plus / s2,
                        BoundFamily::Corrected => k_bound(*sigma, *f_plus, *dim),
                    };
                    Ok(ComparisonOde { alpha: 1.0 + s2, beta: 0.0, gamma: 1.0 + a })
                }
                Side::Upper => Ok(ComparisonOde {
                    alpha: 1.0 - s2,
                    beta: 0.0,
                    gamma: 1.0 - k_bound(*sigma, *f_plus, *dim),
                }),
            }
        }
        _ => domain("bound parameters do not match the bound kind"),
    }
}

/// `dZ/ds` of the comparison equation at `(s, Z)`; `s0` fixes the plain-case `C3`.
pub fn q_rhs(case: BoundCase, params: &BoundParams, s0: f64, s: f64, z: f64) -> Result<f64> {
    if !(s < 0.0) {
        return domain(format!("comparison equations live on s < 0, got s = {s}"));
    }
    Ok(comparison_ode(case, params, s0)?.rhs(s, z))
}

/// One comparison curve through its anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub case: BoundCase,
    pub anchor: PhasePoint,
    pub params: BoundParams,
    pub ode: ComparisonOde,
    /// Exponent `2 alpha` of the homogeneous term.
    pub power: f64,
    /// Constant multiplying `|s|^power` (`A4`, `C1` or `C2`).
    pub coef: f64,
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
}

impl BoundCurve {
    pub fn new(case: BoundCase, anchor: PhasePoint, params: BoundParams) -> Result<Self> {
        let s0 = anchor.s;
        if !(s0 < 0.0) {
            return domain(format!("anchor must satisfy s0 < 0, got {s0}"));
        }
        if !(anchor.z >= 0.0) {
            return domain(format!("anchor must satisfy Z0 >= 0, got {}", anchor.z));
        }
        let ode = comparison_ode(case, &params, s0)?;
        let ComparisonOde { alpha, beta, gamma } = ode;
        if (1.0 - 2.0 * alpha).abs() < 1e-14 || alpha.abs() < 1e-14 {
            return Err(Error::SingularSigma(match params {
                BoundParams::Sigma { sigma, .. } => sigma,
                _ => f64::NAN,
            }));
        }
        let q2 = if beta == 0.0 { 0.0 } else { beta / (1.0 - alpha) };
        let q1 = 2.0 / (1.0 - 2.0 * alpha);
        let q0 = -gamma / alpha;
        let power = 2.0 * alpha;
        let poly0 = q2 * s0 * s0 + q1 * s0 + q0;
        let coef = (anchor.z - poly0) / s0.abs().powf(power);
        Ok(Self { case, anchor, params, ode, power, coef, q2, q1, q0 })
    }

    pub fn plain(anchor: PhasePoint, xi30: f64) -> Result<Self> {
        Self::new(
            BoundCase { kind: BoundKind::Plain, side: Side::Lower },
            anchor,
            BoundParams::Plain { xi30 },
        )
    }

    pub fn irrotational(anchor: PhasePoint) -> Result<Self> {
        Self::new(
            BoundCase { kind: BoundKind::Irrotational, side: Side::Lower },
            anchor,
            BoundParams::Irrotational,
        )
    }

    pub fn sigma(
        side: Side,
        anchor: PhasePoint,
        sigma: f64,
        f_plus: f64,
        dim: Dimension,
        family: BoundFamily,
    ) -> Result<Self> {
        if !(f_plus >= 0.0) {
            return domain(format!("F+ must be non-negative, got {f_plus}"));
        }
        Self::new(
            BoundCase { kind: BoundKind::RadialSigma, side },
            anchor,
            BoundParams::Sigma { sigma, f_plus, dim, family },
        )
    }

    pub fn polynomial_part(&self, s: f64) -> f64 {
        (self.q2 * s + self.q1) * s + self.q0
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coef * s.abs().powf(self.power) + self.polynomial_part(s)
    }

    /// `Z(s + delta) - Z(s)` without cancellation, for `s < 0` and `s + delta < 0`.
    pub fn increment(&self, s: f64, delta: f64) -> f64 {
        let power_part = self.coef * s.abs().powf(self.power) * (self.power * (delta / s).ln_1p()).exp_m1();
        power_part + self.q2 * delta * (2.0 * s + delta) + self.q1 * delta
    }

    /// Analytic `dZ/ds` for `s < 0`.
    pub fn slope(&self, s: f64) -> f64 {
        -self.coef * self.power * s.abs().powf(self.power - 1.0) + 2.0 * self.q2 * s + self.q1
    }

    pub fn q_rhs(&self, s: f64, z: f64) -> f64 {
        self.ode.rhs(s, z)
    }

    /// `dZ/ds - q_rhs(s, Z(s))`.
    pub fn residual(&self, s: f64) -> f64 {
        self.slope(s) - self.q_rhs(s, self.eval(s))
    }

    /// Whether `Z(s)` eventually turns negative as `s -> -inf`, so that an arc
    /// followed towards smaller `s` comes back to the axis.
    pub fn is_bounded(&self) -> bool {
        let poly_order = if self.q2 != 0.0 {
            2.0
        } else if self.q1 != 0.0 {
            1.0
        } else {
            0.0
        };
        if self.coef != 0.0 && self.power > poly_order {
            return self.coef < 0.0;
        }
        if self.coef != 0.0 && self.power == poly_order && poly_order == 2.0 {
            return self.coef + self.q2 < 0.0;
        }
        if self.q2 != 0.0 {
            self.q2 < 0.0
        } else if self.q1 != 0.0 {
            self.q1 > 0.0
        } else {
            self.q0 < 0.0
        }
    }

    /// Anchor on the axis (`Z0 = 0`) for which the power term vanishes: the
    /// negative root of the polynomial part closest to zero.
    pub fn zero_power_anchor(&self) -> Option<f64> {
        let roots: Vec<f64> = if self.q2 == 0.0 {
            if self.q1 == 0.0 {
                vec![]
            } else {
                vec![-self.q0 / self.q1]
            }
        } else {
            let disc = self.q1 * self.q1 - 4.0 * self.q2 * self.q0;
            if disc < 0.0 {
                vec![]
            } else {
                let sq = disc.sqrt();
                let q = -0.5 * (self.q1 + self.q1.signum() * sq);
                let mut r = vec![q / self.q2];
                if q != 0.0 {
                    r.push(self.q0 / q);
                }
                r
            }
        };
        roots.into_iter().filter(|r| *r < 0.0).max_by(f64::total_cmp)
    }
}

pub fn z1_plain(s: f64, anchor: PhasePoint, xi30: f64) -> Result<f64> {
    Ok(BoundCurve::plain(anchor, xi30)?.eval(s))
}

pub fn z1_irrotational(s: f64, anchor: PhasePoint) -> Result<f64> {
    Ok(BoundCurve::irrotational(anchor)?.eval(s))
}

/// Radial curve of the default family.
pub fn z_sigma(
    side: Side,
    s: f64,
    anchor: PhasePoint,
    sigma: f64,
    f_plus: f64,
    dim: Dimension,
) -> Result<f64> {
    if !(s < 0.0) {
        return domain(format!("s must be negative, got {s}"));
    }
    Ok(BoundCurve::sigma(side, anchor, sigma, f_plus, dim, BoundFamily::Printed)?.eval(s))
}

/// Axis anchor at which the lower radial curve has no power term.
pub fn anchor_root_s1(sigma: f64, f_plus: f64, dim: Dimension) -> Result<f64> {
    check_sigma(Side::Lower, sigma)?;
    let d = dim.as_f64();
    let s2 = sigma * sigma;
    Ok(-0.5 * (1.0 + 2.0 * s2) * ((d - 1.0).powi(2) * f_plus * f_plus + s2) / (s2 * (1.0 + s2)))
}

/// `S2 = (1/2)(2 sigma^2 - 1)(sigma^2 K - sigma^4) / (sigma^2 (sigma^2 - 1))`, which for
/// `d = 2` reads `(1/2)(2 sigma^2 - 1)(F+^2 (2 sigma^2 + 1) - sigma^4) / (sigma^2 (sigma^2 - 1))`.
///
/// This is the threshold used for the blow-up estimate; it differs from
/// [`BoundCurve::zero_power_anchor`] of the upper curve, which has `1` in
/// place of `sigma^2` in the second factor.
pub fn anchor_root_s2(sigma: f64, f_plus: f64, dim: Dimension) -> Result<f64> {
    check_sigma(Side::Upper, sigma)?;
    if sigma >= 1.0 {
        return domain(format!("S2 needs sigma < 1, got {sigma}"));
    }
    let s2 = sigma * sigma;
    let k = k_bound(sigma, f_plus, dim);
    Ok(0.5 * (2.0 * s2 - 1.0) * (s2 * k - s2 * s2) / (s2 * (s2 - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionKind {
    /// `Delta = (V')^2 + 2 E' - 1` of the one-dimensional problem.
    OneDimensional,
    /// `Delta- = D0^2 + |curl v0|^2 + (2/3) lambda0 - 1/6` for the first period.
    FirstPeriod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionKind,
    pub value: f64,
    pub verdict: Verdict,
}

impl CriterionVerdict {
    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }
}

/// Global smoothness criterion for one-dimensional data at a point.
pub fn criterion_1d(v0_prime: f64, e0_prime: f64) -> CriterionVerdict {
    let value = v0_prime * v0_prime + 2.0 * e0_prime - 1.0;
    CriterionVerdict {
        criterion: CriterionKind::OneDimensional,
        value,
        verdict: if value < 0.0 { Verdict::Satisfied } else { Verdict::Violated },
    }
}

/// Boundedness during the first period for plain or irrotational data.
pub fn criterion_first_period(d0: f64, curl_norm_sq: f64, lambda0: f64) -> CriterionVerdict {
    let value = d0 * d0 + curl_norm_sq + 2.0 / 3.0 * lambda0 - 1.0 / 6.0;
    let branch = d0 < 0.0 || (d0 == 0.0 && lambda0 > 0.0);
    CriterionVerdict {
        criterion: CriterionKind::FirstPeriod,
        value,
        verdict: if value < 0.0 && branch { Verdict::Satisfied } else { Verdict::Violated },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(s: f64, z: f64) -> PhasePoint {
        PhasePoint::new(s, z).unwrap()
    }

    fn lower_case() -> BoundCase {
        BoundCase { kind: BoundKind::RadialSigma, side: Side::Lower }
    }

    #[test]
    fn increment_matches_difference() {
        let a = PhasePoint::new(-0.8, 0.0).unwrap();
        for side in [Side::Lower, Side::Upper] {
            let c = BoundCurve::sigma(side, a, 0.6, 0.1, Dimension::TWO, BoundFamily::Printed).unwrap();
            for delta in [-1e-3, -1e-1, 1e-2] {
                let direct = c.eval(-0.8 + delta) - c.eval(-0.8);
                assert!((c.increment(-0.8, delta) - direct).abs() < 1e-13);
            }
            let tiny = c.increment(-0.8, 1e-14);
            assert!((tiny / 1e-14 - c.slope(-0.8)).abs() < 1e-6 * c.slope(-0.8).abs());
        }
    }

    #[test]
    fn q_rhs_examples() {
        let irr = BoundCase { kind: BoundKind::Irrotational, side: Side::Lower };
        assert_eq!(q_rhs(irr, &BoundParams::Irrotational, -1.0, -1.0, 0.0).unwrap(), 0.0);
        let p = BoundParams::Sigma {
            sigma: 0.7,
            f_plus: 0.0,
            dim: Dimension::TWO,
            family: BoundFamily::Printed,
        };
        assert_eq!(q_rhs(lower_case(), &p, -1.0, -1.0, 0.0).unwrap(), 0.0);
        assert!(q_rhs(irr, &BoundParams::Irrotational, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn plain_anchor_and_opening() {
        let c = BoundCurve::plain(pp(-1.0, 0.0), 0.0).unwrap();
        assert!((c.coef + 1.0 / 6.0).abs() < 1e-15);
        assert!(c.is_bounded());
        let c = BoundCurve::plain(pp(-0.6, 0.3), 0.4).unwrap();
        assert!((c.eval(-0.6) - 0.3).abs() < 1e-15);
        assert!((c.q2 + 0.16 / 0.36).abs() < 1e-15);
    }

    #[test]
    fn irrotational_marginal_line() {
        let c = BoundCurve::irrotational(pp(-0.75, 0.0)).unwrap();
        assert!(c.coef.abs() < 1e-15);
        for s in [-2.0, -1.0, -0.3] {
            assert!((c.eval(s) - (-2.0 / 3.0 * s - 0.5)).abs() < 1e-15);
        }
        assert_eq!(c.zero_power_anchor(), Some(-0.75));
    }

    #[test]
    fn sigma_anchor_identity() {
        for side in [Side::Lower, Side::Upper] {
            let z = z_sigma(side, -0.8, pp(-0.8, 0.04), 0.9423, 0.1167, Dimension::TWO).unwrap();
            assert!((z - 0.04).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_without_f_plus() {
        let sigma: f64 = 0.6;
        let s2 = sigma * sigma;
        let c = BoundCurve::sigma(Side::Lower, pp(-0.9, 0.0), sigma, 0.0, Dimension::THREE, BoundFamily::Printed)
            .unwrap();
        let s = -0.5;
        let expect = -2.0 * s / (1.0 + 2.0 * s2) - 1.0 / (1.0 + s2) + c.coef * s.abs().powf(2.0 * (1.0 + s2));
        assert!((c.eval(s) - expect).abs() < 1e-15);
    }

    #[test]
    fn singular_sigma_rejected() {
        let a = pp(-0.8, 0.0);
        let f = BoundFamily::Printed;
        let r = BoundCurve::sigma(Side::Upper, a, 1.0, 0.1, Dimension::TWO, f);
        assert!(matches!(r, Err(Error::SingularSigma(_))));
        let r = BoundCurve::sigma(Side::Upper, a, 0.5f64.sqrt(), 0.1, Dimension::TWO, f);
        assert!(matches!(r, Err(Error::SingularSigma(_))));
        assert!(BoundCurve::sigma(Side::Lower, a, 1.0, 0.1, Dimension::TWO, f).is_ok());
        assert!(anchor_root_s2(1.2, 0.1, Dimension::TWO).is_err());
    }

    #[test]
    fn s1_examples() {
        assert!((anchor_root_s1(1.0, 0.0, Dimension::TWO).unwrap() + 0.75).abs() < 1e-15);
        for (sigma, fp) in [(0.5032, 0.08), (0.3, 0.2), (1.4, 0.01)] {
            let s1 = anchor_root_s1(sigma, fp, Dimension::TWO).unwrap();
            let c = BoundCurve::sigma(Side::Lower, pp(s1, 0.0), sigma, fp, Dimension::TWO, BoundFamily::Printed)
                .unwrap();
            assert!(c.coef.abs() < 1e-12);
            assert!((c.zero_power_anchor().unwrap() - s1).abs() < 1e-14);
        }
    }

    #[test]
    fn s2_marginal() {
        let sigma: f64 = 0.9;
        let s2 = sigma * sigma;
        let fp = (s2 * s2 / (2.0 * s2 + 1.0)).sqrt();
        assert!(anchor_root_s2(sigma, fp, Dimension::TWO).unwrap().abs() < 1e-15);
    }

    #[test]
    fn upper_zero_power_anchor() {
        let sigma: f64 = 0.6;
        let fp = 0.12;
        let k = k_bound(sigma, fp, Dimension::TWO);
        let s2 = sigma * sigma;
        let exact = 0.5 * (2.0 * s2 - 1.0) * (k - 1.0) / (s2 - 1.0);
        let c = BoundCurve::sigma(Side::Upper, pp(-0.5, 0.0), sigma, fp, Dimension::TWO, BoundFamily::Printed)
            .unwrap();
        let a = c.zero_power_anchor().unwrap();
        assert!((a - exact).abs() < 1e-14);
        let at = BoundCurve::sigma(Side::Upper, pp(a, 0.0), sigma, fp, Dimension::TWO, BoundFamily::Printed)
            .unwrap();
        assert!(at.coef.abs() < 1e-12);
    }

    #[test]
    fn a4_sign_matches_delta_minus() {
        for &(l0, d0, xi) in &[(0.2, 0.0, 0.0), (0.25, 0.0, 0.0), (0.1, -0.3, 0.1), (-0.4, 0.5, 0.2)] {
            let c = BoundCurve::plain(pp(l0 - 1.0, d0 * d0), xi).unwrap();
            let v = criterion_first_period(d0, xi * xi, l0).value;
            let numer = c.coef * (l0 - 1.0f64).powi(4);
            assert!((numer - v).abs() < 1e-14);
        }
    }

    #[test]
    fn criterion_examples() {
        let c = criterion_1d(0.0, 0.0);
        assert_eq!((c.value, c.verdict), (-1.0, Verdict::Satisfied));
        let c = criterion_1d(0.0, 0.6);
        assert!((c.value - 0.2).abs() < 1e-15 && c.verdict == Verdict::Violated);
        assert_eq!(criterion_1d(1.0, 0.0).verdict, Verdict::Violated);

        let c = criterion_first_period(0.0, 0.0, 0.2);
        assert!((c.value + 1.0 / 30.0).abs() < 1e-15 && c.is_satisfied());
        assert_eq!(criterion_first_period(0.0, 0.0, 0.25).verdict, Verdict::Violated);
        // affine 3D radial, lambda0 = 3 beta
        assert!(criterion_first_period(0.0, 0.0, 3.0 * 0.08).is_satisfied());
        assert!(!criterion_first_period(0.0, 0.0, 3.0 * 0.09).is_satisfied());
    }

    fn all_curves(s0: f64, z0: f64, sigma: f64, fp: f64, xi: f64) -> Vec<BoundCurve> {
        let a = pp(s0, z0);
        let mut v = vec![BoundCurve::plain(a, xi).unwrap(), BoundCurve::irrotational(a).unwrap()];
        for d in [Dimension::ONE, Dimension::TWO, Dimension::THREE] {
            for fam in [BoundFamily::Printed, BoundFamily::Corrected] {
                for side in [Side::Lower, Side::Upper] {
                    if let Ok(c) = BoundCurve::sigma(side, a, sigma, fp, d, fam) {
                        v.push(c);
                    }
                }
            }
        }
        v
    }

    proptest! {
        #[test]
        fn curves_solve_their_equations(
            s0 in -3.0f64..-0.05, z0 in 0.0f64..2.0, sigma in 0.1f64..1.5,
            fp in 0.0f64..0.4, xi in -1.0f64..1.0, t in 0.05f64..1.0,
        ) {
            let s = s0 * (0.2 + 1.6 * t);
            for c in all_curves(s0, z0, sigma, fp, xi) {
                prop_assert!((c.eval(s0) - z0).abs() < 1e-12 * (1.0 + z0));
                let h = 1e-6 * s.abs();
                let fd = (c.eval(s + h) - c.eval(s - h)) / (2.0 * h);
                let scale = 1.0 + c.slope(s).abs();
                prop_assert!((fd - c.slope(s)).abs() < 1e-6 * scale);
                prop_assert!(c.residual(s).abs() < 1e-10 * scale, "{:?} residual {}", c.case, c.residual(s));
            }
        }
    }
}
