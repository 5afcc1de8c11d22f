//! Bracketed scalar root finding (Brent–Dekker).

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[a, b]` by Brent's method.
///
/// Requires `f(a)` and `f(b)` of opposite sign (an exact zero at either end is
/// returned directly). The returned point always lies inside the initial
/// bracket and the final bracket is narrower than `tol`.
pub fn find_root<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("non-finite bracket [{a}, {b}]")));
    }
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { a, b, fa, fb });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Walks from `start` in `direction` (±1) with geometrically growing steps
/// until `f` changes sign, then refines with [`find_root`].
///
/// Returns `None` when no sign change is met before `limit`. `f(start)` is
/// assumed to be on the "inside" (the sign to be left); the first probe is at
/// `start + direction * h0`.
pub fn march_to_root<F>(
    mut f: F,
    start: f64,
    direction: f64,
    h0: f64,
    h_max: f64,
    limit: f64,
    tol: f64,
) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let beyond = |x: f64| if direction > 0.0 { x >= limit } else { x <= limit };
    let mut x = start;
    let mut fx = f(x);
    let mut h = h0;
    loop {
        let mut next = x + direction * h;
        let last = beyond(next);
        if last {
            next = limit;
        }
        let fn_ = f(next);
        if fn_ == 0.0 {
            return Some(next);
        }
        if fx != 0.0 && fn_.signum() != fx.signum() {
            return find_root(&mut f, x.min(next), x.max(next), tol).ok();
        }
        if last {
            return None;
        }
        x = next;
        fx = fn_;
        h = (h * 1.5).min(h_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let x = find_root(|x| x * x - 2.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn linear_irrotational_root() {
        let x = find_root(|s| -(2.0 / 3.0) * s - 0.5, -3.0, -0.1, 1e-14).unwrap();
        assert!((x + 0.75).abs() < 1e-14);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let err = find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn deterministic_and_inside_bracket() {
        let f = |x: f64| (x - 0.3).powi(3) + 0.01 * x;
        let a = find_root(f, -2.0, 5.0, 1e-13).unwrap();
        let b = find_root(f, -2.0, 5.0, 1e-13).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((-2.0..=5.0).contains(&a));
    }

    #[test]
    fn march_finds_first_crossing() {
        let r = march_to_root(|x| (x - 1.0) * (x - 3.0), 0.0, 1.0, 1e-3, 0.1, 10.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(march_to_root(|x| x * x + 1.0, 0.0, -1.0, 1e-3, 0.1, -10.0, 1e-14).is_none());
    }

    proptest::proptest! {
        #[test]
        fn root_stays_in_bracket(c in -0.9f64..0.9, k in 0.5f64..20.0) {
            let f = |x: f64| (k * (x - c)).tanh();
            let x = find_root(f, -1.0, 1.0, 1e-12).unwrap();
            proptest::prop_assert!((-1.0..=1.0).contains(&x));
            proptest::prop_assert!((x - c).abs() < 1e-10);
        }
    }
}
