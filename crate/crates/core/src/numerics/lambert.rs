//! Real Lambert W, principal branch and the lower branch `W_{-1}`.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const INV_E: f64 = 1.0 / E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WBranch {
    /// `k = 0`, `W >= -1`, defined on `[-1/e, inf)`.
    Principal,
    /// `k = -1`, `W <= -1`, defined on `[-1/e, 0)`.
    Lower,
}

impl WBranch {
    pub fn from_k(k: i32) -> Result<Self> {
        match k {
            0 => Ok(WBranch::Principal),
            -1 => Ok(WBranch::Lower),
            _ => Err(Error::Domain(format!("Lambert W branch k = {k} is not real"))),
        }
    }

    pub fn k(self) -> i32 {
        match self {
            WBranch::Principal => 0,
            WBranch::Lower => -1,
        }
    }
}

/// Branch-point series in `p = ±sqrt(2(e x + 1))`.
fn branch_point_series(p: f64) -> f64 {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p.powi(4)
        + 769.0 / 17280.0 * p.powi(5)
}

fn initial_guess(branch: WBranch, x: f64) -> f64 {
    let q = E * x + 1.0;
    match branch {
        WBranch::Principal => {
            if q < 0.3 {
                branch_point_series((2.0 * q).sqrt())
            } else if x < 1.0 {
                // Pade-like guess around zero
                x * (1.0 + 4.0 / 3.0 * x) / (1.0 + 7.0 / 3.0 * x + 5.0 / 6.0 * x * x)
            } else {
                let l1 = x.ln();
                let l2 = l1.ln().max(0.0);
                l1 - l2 + if l1 > 0.0 { l2 / l1 } else { 0.0 }
            }
        }
        WBranch::Lower => {
            if q < 0.3 {
                branch_point_series(-(2.0 * q).sqrt())
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    }
}

/// Solves `w e^w = x` on the requested real branch.
///
/// Uses Halley's iteration from a branch-specific starting point; within
/// `1e-4` of the branch point the series guess is already close and the
/// iteration keeps the branch sign of `w + 1`.
pub fn lambert_w(branch: WBranch, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("Lambert W of NaN".into()));
    }
    if x < -INV_E {
        // tolerate round-off just below the branch point
        if x > -INV_E - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("Lambert W argument {x} below -1/e")));
    }
    if x == -INV_E {
        return Ok(-1.0);
    }
    match branch {
        WBranch::Principal => {
            if x == 0.0 {
                return Ok(0.0);
            }
            if x == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
        }
        WBranch::Lower => {
            if x >= 0.0 {
                return Err(Error::Domain(format!("W_-1 undefined at {x} >= 0")));
            }
        }
    }

    let mut w = initial_guess(branch, x);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let mut next = w - step;
        match branch {
            WBranch::Principal if next < -1.0 => next = 0.5 * (w - 1.0),
            WBranch::Lower if next > -1.0 => next = 0.5 * (w - 1.0),
            _ => {}
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resid(w: f64, x: f64) -> f64 {
        (w * w.exp() - x).abs() / x.abs().max(1.0)
    }

    #[test]
    fn special_values() {
        assert_eq!(lambert_w(WBranch::Principal, 0.0).unwrap(), 0.0);
        assert!((lambert_w(WBranch::Principal, E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w(WBranch::Lower, -INV_E).unwrap(), -1.0);
        assert_eq!(lambert_w(WBranch::Principal, -INV_E).unwrap(), -1.0);
    }

    #[test]
    fn known_lower_value() {
        // W_{-1}(-0.1) = -3.577152063957297
        let w = lambert_w(WBranch::Lower, -0.1).unwrap();
        assert!((w + 3.577_152_063_957_297).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w(WBranch::Principal, -0.5).is_err());
        assert!(lambert_w(WBranch::Lower, 0.1).is_err());
        assert!(lambert_w(WBranch::Lower, 0.0).is_err());
        assert!(WBranch::from_k(1).is_err());
    }

    #[test]
    fn residual_on_log_grid() {
        for i in 0..1000 {
            let x = 10f64.powf(-12.0 + 24.0 * i as f64 / 999.0);
            let w = lambert_w(WBranch::Principal, x).unwrap();
            assert!(resid(w, x) < 1e-12, "x = {x}");
            let xn = -INV_E * 10f64.powf(-300.0 * i as f64 / 999.0);
            let w0 = lambert_w(WBranch::Principal, xn).unwrap();
            let wm = lambert_w(WBranch::Lower, xn).unwrap();
            assert!(resid(w0, xn) < 1e-12 && w0 >= -1.0, "x = {xn}");
            assert!(resid(wm, xn) < 1e-12 && wm <= -1.0, "x = {xn}");
        }
    }

    #[test]
    fn near_branch_point() {
        for k in 1..40 {
            let x = -INV_E + 10f64.powf(-(k as f64) / 3.0);
            for b in [WBranch::Principal, WBranch::Lower] {
                if b == WBranch::Lower && x >= 0.0 {
                    continue;
                }
                let w = lambert_w(b, x).unwrap();
                assert!(resid(w, x) < 1e-12, "{b:?} x = {x}");
            }
        }
    }
}
