//! Python bindings: pulse thresholds, comparison spirals, lifetime bounds and
//! the reference integrator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cold_plasma::bounds::{self, BoundFamily, CriterionVerdict};
use cold_plasma::dynamics::{self, gaussian_profile, Dimension};
use cold_plasma::oracle::{self, OracleOptions};
use cold_plasma::pulse::{self, PulseVerdict};
use cold_plasma::spiral::{self, FplusRule, SigmaPair, SpiralKind};
use cold_plasma::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Degenerate(_) | Error::SingularSigma(_) | Error::NoFixedPoint(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

pub fn parse_family(name: &str) -> Result<BoundFamily, String> {
    match name.to_ascii_lowercase().as_str() {
        "printed" => Ok(BoundFamily::Printed),
        "corrected" => Ok(BoundFamily::Corrected),
        _ => Err(format!("family must be 'printed' or 'corrected', got {name:?}")),
    }
}

pub fn parse_kind(name: &str) -> Result<SpiralKind, String> {
    match name.to_ascii_lowercase().as_str() {
        "outer" => Ok(SpiralKind::Outer),
        "inner" => Ok(SpiralKind::Inner),
        _ => Err(format!("kind must be 'outer' or 'inner', got {name:?}")),
    }
}

fn family(name: &str) -> PyResult<BoundFamily> {
    parse_family(name).map_err(PyValueError::new_err)
}

fn dimension(d: u32) -> PyResult<Dimension> {
    Dimension::new(d).map_err(to_py)
}

pub fn verdict_name(v: PulseVerdict) -> &'static str {
    match v {
        PulseVerdict::SmoothFirstPeriod => "smooth",
        PulseVerdict::BlowUpFirstPeriod => "blow-up",
        PulseVerdict::Indeterminate => "indeterminate",
    }
}

/// Optimised pulse thresholds.
#[pyclass(frozen, get_all, skip_from_py_object, module = "cold_plasma")]
#[derive(Clone)]
pub struct Thresholds {
    sigma1: f64,
    lambda1: f64,
    sigma2: f64,
    lambda2: f64,
    k_smooth: f64,
    k_blowup: f64,
}

#[pymethods]
impl Thresholds {
    fn __repr__(&self) -> String {
        format!(
            "Thresholds(sigma1={:.6}, lambda1={:.6}, sigma2={:.6}, lambda2={:.6})",
            self.sigma1, self.lambda1, self.sigma2, self.lambda2
        )
    }
}

#[pyfunction]
fn thresholds() -> Thresholds {
    let t = pulse::optimize_thresholds();
    Thresholds {
        sigma1: t.sigma1,
        lambda1: t.lambda1,
        sigma2: t.sigma2,
        lambda2: t.lambda2,
        k_smooth: t.k_smooth(),
        k_blowup: t.k_blowup(),
    }
}

/// "smooth", "blow-up" or "indeterminate" for the pulse `K exp(-r^2)`.
#[pyfunction]
fn classify_pulse(k: f64) -> PyResult<&'static str> {
    pulse::classify_pulse(k).map(verdict_name).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (which, sigma))]
fn fixed_point(which: u8, sigma: f64) -> PyResult<f64> {
    let map = match which {
        1 => pulse::PulseMap::Lambda1,
        2 => pulse::PulseMap::Lambda2,
        _ => return Err(PyValueError::new_err("which must be 1 or 2")),
    };
    pulse::fixed_point(map, sigma).map(|r| r.lambda_star).map_err(to_py)
}

fn criterion_pair(c: CriterionVerdict) -> (f64, bool) {
    (c.value, c.is_satisfied())
}

/// `(value, satisfied)` for one-dimensional data at a point.
#[pyfunction]
fn criterion_1d(v0_prime: f64, e0_prime: f64) -> (f64, bool) {
    criterion_pair(bounds::criterion_1d(v0_prime, e0_prime))
}

/// `(value, satisfied)` for the first-period criterion.
#[pyfunction]
#[pyo3(signature = (d0, lambda0, curl_norm_sq = 0.0))]
fn criterion_first_period(d0: f64, lambda0: f64, curl_norm_sq: f64) -> (f64, bool) {
    criterion_pair(bounds::criterion_first_period(d0, curl_norm_sq, lambda0))
}

/// Period of the radial orbit through `(F0, G0)`.
#[pyfunction]
#[pyo3(signature = (f0, g0, dim = 2))]
fn period(f0: f64, g0: f64, dim: u32) -> PyResult<f64> {
    dynamics::period(f0, g0, dimension(dim)?).map_err(to_py)
}

/// Compound comparison spiral in the `(lambda, D)` plane.
#[pyclass(frozen, module = "cold_plasma")]
pub struct Spiral {
    inner: spiral::Spiral,
}

#[pymethods]
impl Spiral {
    #[new]
    #[pyo3(signature = (kind, lambda0, d0 = 0.0, f_plus = None, sigma1 = 0.5032, sigma2 = 0.9423, dim = 2, max_rev = 20, family = "printed"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: &str,
        lambda0: f64,
        d0: f64,
        f_plus: Option<f64>,
        sigma1: f64,
        sigma2: f64,
        dim: u32,
        max_rev: u32,
        family: &str,
    ) -> PyResult<Self> {
        let kind = parse_kind(kind).map_err(PyValueError::new_err)?;
        let rule = f_plus.map_or(FplusRule::PulseMap, FplusRule::OrbitConstant);
        let sigmas = SigmaPair { sigma1, sigma2 };
        let s = spiral::build_spiral(kind, (lambda0, d0), rule, sigmas, dimension(dim)?, max_rev, self::family(family)?)
            .map_err(to_py)?;
        Ok(Self { inner: s })
    }

    #[getter]
    fn revolutions(&self) -> u32 {
        self.inner.revolutions
    }

    /// Axis crossings as `lambda` values.
    #[getter]
    fn crossings(&self) -> Vec<f64> {
        self.inner.crossings.iter().map(|s| s + 1.0).collect()
    }

    #[getter]
    fn stop(&self) -> String {
        format!("{:?}", self.inner.stop)
    }

    /// Time to complete `n` revolutions, or `None` if the spiral stops first.
    fn time_through(&self, n: u32) -> PyResult<Option<f64>> {
        self.inner.time_through(n).map_err(to_py)
    }

    /// `(t, lambda, D)` samples along the spiral.
    #[pyo3(signature = (per_segment = 100))]
    fn polyline(&self, per_segment: usize) -> PyResult<Vec<(f64, f64, f64)>> {
        let pts = self.inner.polyline(per_segment).map_err(to_py)?;
        Ok(pts.into_iter().map(|p| (p.t, p.lambda, p.d)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Spiral({:?}, revolutions={}, stop={:?})",
            self.inner.config.kind, self.inner.revolutions, self.inner.stop
        )
    }
}

/// `(T_l, T_L, n)` at radius `r0` of the pulse `K exp(-r^2)`.
#[pyfunction]
#[pyo3(signature = (k, r0 = 0.0, sigma1 = 0.5032, sigma2 = 0.9423, max_rev = 20, family = "printed"))]
fn lifetime(k: f64, r0: f64, sigma1: f64, sigma2: f64, max_rev: u32, family: &str) -> PyResult<Option<(f64, f64, u32)>> {
    let profile = gaussian_profile(k).map_err(to_py)?;
    let est = spiral::point_lifetime(&profile, r0, SigmaPair { sigma1, sigma2 }, max_rev, self::family(family)?)
        .map_err(to_py)?;
    Ok(est.map(|e| (e.t_lower, e.t_upper, e.revolutions)))
}

/// Reference integration of one characteristic of the pulse.
#[pyclass(frozen, module = "cold_plasma")]
pub struct OracleRun {
    inner: oracle::CharacteristicRun,
}

#[pymethods]
impl OracleRun {
    #[new]
    #[pyo3(signature = (k, r0 = 0.0, t_max = 100.0, tol = 1e-10))]
    fn new(py: Python<'_>, k: f64, r0: f64, t_max: f64, tol: f64) -> PyResult<Self> {
        let profile = gaussian_profile(k).map_err(to_py)?;
        let run = py
            .detach(|| oracle::run_characteristic(&profile, r0, OracleOptions::new(t_max, tol)))
            .map_err(to_py)?;
        Ok(Self { inner: run })
    }

    /// Blow-up time, or `None` if the run stayed bounded.
    #[getter]
    fn t_star(&self) -> Option<f64> {
        self.inner.blowup.t_star
    }

    #[getter]
    fn revolutions(&self) -> u32 {
        oracle::count_revolutions_oracle(&self.inner)
    }

    #[getter]
    fn crossing_times(&self) -> Vec<f64> {
        self.inner.crossings.iter().map(|c| c.t).collect()
    }

    #[getter]
    fn min_density(&self) -> f64 {
        self.inner.min_density()
    }

    fn revolution_time(&self, n: u32) -> Option<f64> {
        self.inner.revolution_time(n)
    }

    /// `(t, lambda, D)` at every accepted step.
    fn trajectory(&self) -> Vec<(f64, f64, f64)> {
        self.inner.states().into_iter().map(|s| (s.t, s.lambda, s.div_v)).collect()
    }

    fn __repr__(&self) -> String {
        format!("OracleRun(r0={}, t_star={:?})", self.inner.r0, self.inner.blowup.t_star)
    }
}

/// `(min t*, r at min)` over `grid`; both `None` if nothing blows up.
#[pyfunction]
#[pyo3(signature = (k, grid = None, t_max = 100.0, tol = 1e-10))]
fn min_blowup_sweep(
    py: Python<'_>,
    k: f64,
    grid: Option<Vec<f64>>,
    t_max: f64,
    tol: f64,
) -> PyResult<(Option<f64>, Option<f64>)> {
    let profile = gaussian_profile(k).map_err(to_py)?;
    let grid = grid.unwrap_or_else(oracle::default_sweep_grid);
    let res = py
        .detach(|| oracle::min_blowup_sweep(&profile, &grid, OracleOptions::new(t_max, tol)))
        .map_err(to_py)?;
    Ok((res.min_t_star, res.r_at_min))
}

#[pymodule]
#[pyo3(name = "cold_plasma")]
fn cold_plasma_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Thresholds>()?;
    m.add_class::<Spiral>()?;
    m.add_class::<OracleRun>()?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(classify_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_1d, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_first_period, m)?)?;
    m.add_function(wrap_pyfunction!(period, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime, m)?)?;
    m.add_function(wrap_pyfunction!(min_blowup_sweep, m)?)?;
    Ok(())
}
