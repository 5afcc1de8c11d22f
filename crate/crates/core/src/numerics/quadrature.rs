//! Adaptive Gauss-Kronrod quadrature with optional inverse-square-root
//! endpoint treatment.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Which ends of the interval carry an inverse-square-root singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SingularEnds {
    pub left: bool,
    pub right: bool,
}

impl SingularEnds {
    pub const NONE: Self = Self { left: false, right: false };
    pub const BOTH: Self = Self { left: true, right: true };
    pub const LEFT: Self = Self { left: true, right: false };
    pub const RIGHT: Self = Self { left: false, right: true };
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 2000 }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive GK15 on a regular integrand.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (r0, e0) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, r0, e0)];
    let mut total = r0;
    let mut err = e0;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if panels.len() >= opts.max_subdivisions || !total.is_finite() {
            return Err(Error::QuadratureFailure { a, b, estimate: err });
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, pr, pe) = panels.swap_remove(i);
        let m = 0.5 * (pa + pb);
        if m <= pa.min(pb) || m >= pa.max(pb) {
            return Err(Error::QuadratureFailure { a, b, estimate: err });
        }
        let (r1, e1) = gk15(&mut f, pa, m);
        let (r2, e2) = gk15(&mut f, m, pb);
        total += r1 + r2 - pr;
        err += e1 + e2 - pe;
        panels.push((pa, m, r1, e1));
        panels.push((m, pb, r2, e2));
        // refresh sums to keep cancellation from drifting
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Integrates `f` over `[a, b]` where the flagged ends may behave like
/// `|s - end|^{-1/2}`.
///
/// Each flagged half is mapped by `s = end ± u²`, which turns the
/// singularity into a bounded integrand in `u`.
pub fn integrate_singular<F>(mut f: F, a: f64, b: f64, ends: SingularEnds) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_singular_with(&mut f, a, b, ends, QuadOptions::default())
}

pub fn integrate_singular_with<F>(
    f: &mut F,
    a: f64,
    b: f64,
    ends: SingularEnds,
    opts: QuadOptions,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        let flipped = SingularEnds { left: ends.right, right: ends.left };
        return integrate_singular_with(f, b, a, flipped, opts).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let half = |lo: f64, hi: f64, sing_lo: bool, sing_hi: bool, f: &mut F| -> Result<f64> {
        if sing_lo {
            let w = (hi - lo).sqrt();
            integrate_adaptive(|u| 2.0 * u * f(lo + u * u), 0.0, w, opts)
        } else if sing_hi {
            let w = (hi - lo).sqrt();
            integrate_adaptive(|u| 2.0 * u * f(hi - u * u), 0.0, w, opts)
        } else {
            integrate_adaptive(f, lo, hi, opts)
        }
    };
    match (ends.left, ends.right) {
        (false, false) => integrate_adaptive(f, a, b, opts),
        _ => Ok(half(a, m, ends.left, false, f)? + half(m, b, false, ends.right, f)?),
    }
}
