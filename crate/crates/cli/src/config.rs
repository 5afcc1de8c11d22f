//! Scenario configuration: TOML in, validated before anything runs.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use cold_plasma::bounds::BoundFamily;
use cold_plasma::dynamics::Dimension;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[value(name = "criterion-1d")]
    #[serde(rename = "criterion-1d")]
    Criterion1d,
    FirstPeriod,
    GaussPulse,
    CountRevolutions,
    Lifetime,
    OracleRun,
    Sweep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Criterion1d => "criterion-1d",
            Mode::FirstPeriod => "first-period",
            Mode::GaussPulse => "gauss-pulse",
            Mode::CountRevolutions => "count-revolutions",
            Mode::Lifetime => "lifetime",
            Mode::OracleRun => "oracle-run",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FplusChoice {
    /// `F+` of the characteristic's own orbit, fixed on every arc.
    #[default]
    Orbit,
    /// `F+(lambda)` recomputed at every axis crossing.
    PulseMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    #[default]
    Printed,
    Corrected,
}

impl From<FamilyChoice> for BoundFamily {
    fn from(f: FamilyChoice) -> Self {
        match f {
            FamilyChoice::Printed => BoundFamily::Printed,
            FamilyChoice::Corrected => BoundFamily::Corrected,
        }
    }
}

fn default_dim() -> u32 {
    2
}
fn default_max_rev() -> u32 {
    20
}
fn default_t_max() -> f64 {
    100.0
}
fn default_tol() -> f64 {
    1e-10
}
fn default_sigma1() -> f64 {
    0.5032
}
fn default_sigma2() -> f64 {
    0.9423
}
fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Option<Mode>,
    /// Amplitude `K` of the Gaussian pulse `G0(r) = K exp(-r^2)`.
    pub k_pulse: Option<f64>,
    /// Radius of the characteristic.
    #[serde(default)]
    pub r0: f64,
    /// Start point override; `lambda0 = 2K` at `r0` when absent.
    pub start_lambda: Option<f64>,
    #[serde(default)]
    pub start_d: f64,
    #[serde(default = "default_sigma1")]
    pub sigma1: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default)]
    pub family: FamilyChoice,
    #[serde(default)]
    pub fplus_rule: FplusChoice,
    #[serde(default = "default_dim")]
    pub dim: u32,
    #[serde(default = "default_max_rev")]
    pub max_rev: u32,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub r_grid: Option<Vec<f64>>,
    /// Points per arc in exported curves.
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub v0_prime: Option<f64>,
    pub e0_prime: Option<f64>,
    pub d0: Option<f64>,
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub curl_norm_sq: f64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes")
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.dim).expect("validated")
    }

    fn require(&self, name: &str, v: Option<f64>) -> Result<f64, CliError> {
        let mode = self.mode.map_or("?", Mode::as_str);
        v.ok_or_else(|| CliError::Config(format!("mode {mode} needs `{name}`")))
    }

    /// Checks everything a run needs, so a bad config never produces output.
    pub fn validate(&self) -> Result<Mode, CliError> {
        let mode = self.mode.ok_or_else(|| CliError::Config("no mode given".into()))?;
        let bad = |msg: String| Err(CliError::Config(msg));
        if Dimension::new(self.dim).is_err() {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        let finite = [self.r0, self.start_d, self.sigma1, self.sigma2, self.t_max, self.tol, self.curl_norm_sq];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if !(self.t_max > 0.0) || !(self.tol > 0.0 && self.tol < 1e-2) {
            return bad(format!("need t_max > 0 and 0 < tol < 1e-2, got {} and {}", self.t_max, self.tol));
        }
        if !(self.sigma1 > 0.0) || !(self.sigma2 > 0.0) {
            return bad("sigma1 and sigma2 must be positive".into());
        }
        if self.r0 < 0.0 {
            return bad(format!("r0 must be non-negative, got {}", self.r0));
        }
        if self.samples < 2 {
            return bad("samples must be at least 2".into());
        }
        if let Some(g) = &self.r_grid {
            if g.is_empty() || g.iter().any(|r| !r.is_finite() || *r < 0.0) {
                return bad("r_grid must be a non-empty list of non-negative radii".into());
            }
        }
        if let Some(l) = self.start_lambda {
            if !(l < 1.0) {
                return bad(format!("start_lambda must be below 1, got {l}"));
            }
        }
        let needs_pulse = matches!(
            mode,
            Mode::GaussPulse | Mode::CountRevolutions | Mode::Lifetime | Mode::OracleRun | Mode::Sweep
        );
        if needs_pulse {
            let k = self.require("k_pulse", self.k_pulse)?;
            if !(k > 0.0) || !k.is_finite() {
                return bad(format!("k_pulse must be positive, got {k}"));
            }
            if mode != Mode::GaussPulse && !(2.0 * k < 1.0) {
                return bad(format!("k_pulse must be below 0.5 for a positive density, got {k}"));
            }
            if mode != Mode::GaussPulse && self.dim != 2 {
                return bad("Gaussian pulse modes are two-dimensional".into());
            }
        }
        match mode {
            Mode::Criterion1d => {
                let e = self.require("e0_prime", self.e0_prime)?;
                self.require("v0_prime", self.v0_prime)?;
                if !(e < 1.0) {
                    return bad(format!("e0_prime must be below 1, got {e}"));
                }
            }
            Mode::FirstPeriod => {
                self.require("d0", self.d0)?;
                self.require("lambda0", self.lambda0)?;
                if self.curl_norm_sq < 0.0 {
                    return bad("curl_norm_sq must be non-negative".into());
                }
            }
            _ => {}
        }
        Ok(mode)
    }
}
