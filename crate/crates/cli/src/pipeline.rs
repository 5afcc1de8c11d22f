//! Executes a validated scenario into a report plus curve files, all in
//! memory; nothing touches the disk until [`write_outcome`].

use std::fs;
use std::path::Path;

use serde::Serialize;

use cold_plasma::bounds::{criterion_1d, criterion_first_period, BoundFamily, CriterionVerdict};
use cold_plasma::dynamics::{orbit_extremes, CharacteristicState, Dimension, RadialProfile};
use cold_plasma::oracle::{
    count_revolutions_oracle, default_sweep_grid, min_blowup_sweep, run_characteristic, run_state, AxisCrossing,
    BlowupRecord, CharacteristicRun, OracleOptions, SweepResult,
};
use cold_plasma::pulse::{classify_pulse, optimize_thresholds, PulseVerdict, Thresholds};
use cold_plasma::spiral::{
    build_spiral, guaranteed_field_lifetime, lifetime, FieldLifetime, FplusRule, SigmaPair, Spiral, SpiralKind,
    SpiralStop,
};

use crate::config::{FplusChoice, Mode, ScenarioConfig};
use crate::error::CliError;

pub const REPORT_FORMAT: u32 = 1;
pub const CSV_HEADER: [&str; 5] = ["curve_id", "s", "t", "lambda", "D"];

#[derive(Debug, Clone, Serialize)]
pub struct PulseSection {
    pub k_pulse: f64,
    pub thresholds: Thresholds,
    pub k_smooth: f64,
    pub k_blowup: f64,
    pub verdict: PulseVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpiralSection {
    pub start_lambda: f64,
    pub start_d: f64,
    pub f_plus: Option<f64>,
    pub revolutions: u32,
    pub t_lower: f64,
    pub t_upper: f64,
    pub outer_stop: SpiralStop,
    pub inner_stop: SpiralStop,
    pub outer_crossings_lambda: Vec<f64>,
    pub inner_crossings_lambda: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub r0: f64,
    pub t_end: f64,
    pub revolutions: u32,
    pub crossings: Vec<AxisCrossing>,
    pub blowup: BlowupRecord,
    pub min_density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub report_format: u32,
    pub mode: Mode,
    pub inputs: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spiral: Option<SpiralSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_lifetime: Option<FieldLifetime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepResult>,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// A report plus the files it refers to.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: AnalysisReport,
    pub files: Vec<(String, Vec<u8>)>,
}

pub struct CurveRow {
    pub s: f64,
    pub t: f64,
    pub lambda: f64,
    pub d: f64,
}

fn fmt(v: f64) -> String {
    format!("{v:.14e}")
}

/// CSV with the fixed header and 15 significant digits per value.
pub fn curves_csv<'a>(curves: impl IntoIterator<Item = (&'a str, Vec<CurveRow>)>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for (id, rows) in curves {
        for r in rows {
            w.write_record([id.to_string(), fmt(r.s), fmt(r.t), fmt(r.lambda), fmt(r.d)]).expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

fn spiral_rows(sp: &Spiral, samples: usize) -> Result<Vec<CurveRow>, CliError> {
    let mut rows: Vec<CurveRow> = sp
        .polyline(samples)?
        .into_iter()
        .map(|p| CurveRow { s: p.s, t: p.t, lambda: p.lambda, d: p.d })
        .collect();
    if rows.is_empty() {
        let (l, d) = sp.start;
        rows.push(CurveRow { s: l - 1.0, t: 0.0, lambda: l, d });
    }
    Ok(rows)
}

fn trajectory_rows(run: &CharacteristicRun) -> Vec<CurveRow> {
    run.states()
        .into_iter()
        .map(|s| CurveRow { s: s.lambda - 1.0, t: s.t, lambda: s.lambda, d: s.div_v })
        .collect()
}

fn oracle_section(run: &CharacteristicRun) -> OracleSection {
    OracleSection {
        r0: run.r0,
        t_end: run.trajectory.t_end(),
        revolutions: count_revolutions_oracle(run),
        crossings: run.crossings.clone(),
        blowup: run.blowup,
        min_density: run.min_density(),
    }
}

fn oracle_options(cfg: &ScenarioConfig) -> OracleOptions {
    OracleOptions::new(cfg.t_max, cfg.tol)
}

fn pulse_profile(cfg: &ScenarioConfig) -> Result<RadialProfile, CliError> {
    Ok(RadialProfile::gaussian(cfg.k_pulse.expect("validated"))?)
}

/// Initial state of the characteristic the spiral follows.
///
/// With `start_lambda` set the start is the axis point with
/// `(lambda, D) = (start_lambda, start_d)`, i.e. `G = lambda/2`, `F = D/2`.
fn spiral_state(cfg: &ScenarioConfig) -> Result<CharacteristicState, CliError> {
    match cfg.start_lambda {
        Some(l) => Ok(CharacteristicState::on_axis(cfg.start_d / 2.0, l / 2.0, Dimension::TWO)),
        None => Ok(pulse_profile(cfg)?.initial_state(cfg.r0)?),
    }
}

fn spirals(cfg: &ScenarioConfig) -> Result<(Spiral, Spiral, CharacteristicState, Option<f64>), CliError> {
    let state = spiral_state(cfg)?;
    let (rule, f_plus) = match cfg.fplus_rule {
        FplusChoice::Orbit => {
            let fp = orbit_extremes(state.f, state.g, Dimension::TWO)?.f_plus;
            (FplusRule::OrbitConstant(fp), Some(fp))
        }
        FplusChoice::PulseMap => (FplusRule::PulseMap, None),
    };
    let sigmas = SigmaPair { sigma1: cfg.sigma1, sigma2: cfg.sigma2 };
    let family: BoundFamily = cfg.family.into();
    let start = (state.lambda, state.div_v);
    let outer = build_spiral(SpiralKind::Outer, start, rule, sigmas, Dimension::TWO, cfg.max_rev, family)?;
    let inner = build_spiral(SpiralKind::Inner, start, rule, sigmas, Dimension::TWO, cfg.max_rev, family)?;
    Ok((inner, outer, state, f_plus))
}

fn crossings_lambda(sp: &Spiral) -> Vec<f64> {
    sp.crossings.iter().map(|s| s + 1.0).collect()
}

/// Runs a scenario. `cfg` must have passed [`ScenarioConfig::validate`].
pub fn run(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let mode = cfg.validate()?;
    let mut report = AnalysisReport {
        tool: "cold-plasma",
        version: env!("CARGO_PKG_VERSION"),
        report_format: REPORT_FORMAT,
        mode,
        inputs: cfg.clone(),
        criterion: None,
        pulse: None,
        spiral: None,
        field_lifetime: None,
        oracle: None,
        sweep: None,
        files: Vec::new(),
        wall_clock_s: None,
    };
    let mut files = Vec::new();
    match mode {
        Mode::Criterion1d => {
            let (v, e) = (cfg.v0_prime.expect("validated"), cfg.e0_prime.expect("validated"));
            report.criterion = Some(criterion_1d(v, e));
            let s = CharacteristicState { t: 0.0, lambda: e, div_v: v, f: 0.0, g: 0.0, r: 0.0 };
            let run = run_state(s, Dimension::ONE, oracle_options(cfg))?;
            files.push(("trajectory.csv".to_string(), curves_csv([("oracle", trajectory_rows(&run))])));
            report.oracle = Some(oracle_section(&run));
        }
        Mode::FirstPeriod => {
            let (d0, l0) = (cfg.d0.expect("validated"), cfg.lambda0.expect("validated"));
            report.criterion = Some(criterion_first_period(d0, cfg.curl_norm_sq, l0));
        }
        Mode::GaussPulse => {
            let k = cfg.k_pulse.expect("validated");
            let thresholds = optimize_thresholds();
            report.pulse = Some(PulseSection {
                k_pulse: k,
                thresholds,
                k_smooth: thresholds.k_smooth(),
                k_blowup: thresholds.k_blowup(),
                verdict: classify_pulse(k)?,
            });
        }
        Mode::CountRevolutions | Mode::Lifetime => {
            let (inner, outer, state, f_plus) = spirals(cfg)?;
            let est = lifetime(&inner, &outer)?;
            report.spiral = Some(SpiralSection {
                start_lambda: state.lambda,
                start_d: state.div_v,
                f_plus,
                revolutions: est.revolutions,
                t_lower: est.t_lower,
                t_upper: est.t_upper,
                outer_stop: outer.stop,
                inner_stop: inner.stop,
                outer_crossings_lambda: crossings_lambda(&outer),
                inner_crossings_lambda: crossings_lambda(&inner),
            });
            let run = run_state(state, Dimension::TWO, oracle_options(cfg))?;
            report.oracle = Some(oracle_section(&run));
            files.push(("spiral_outer.csv".to_string(), curves_csv([("L", spiral_rows(&outer, cfg.samples)?)])));
            files.push(("spiral_inner.csv".to_string(), curves_csv([("l", spiral_rows(&inner, cfg.samples)?)])));
            files.push(("trajectory.csv".to_string(), curves_csv([("oracle", trajectory_rows(&run))])));
            if mode == Mode::Lifetime {
                let grid = cfg.r_grid.clone().unwrap_or_else(|| vec![cfg.r0]);
                let sigmas = SigmaPair { sigma1: cfg.sigma1, sigma2: cfg.sigma2 };
                report.field_lifetime = Some(guaranteed_field_lifetime(
                    &pulse_profile(cfg)?,
                    &grid,
                    sigmas,
                    cfg.max_rev,
                    cfg.family.into(),
                )?);
            }
        }
        Mode::OracleRun => {
            let run = run_characteristic(&pulse_profile(cfg)?, cfg.r0, oracle_options(cfg))?;
            files.push(("trajectory.csv".to_string(), curves_csv([("oracle", trajectory_rows(&run))])));
            report.oracle = Some(oracle_section(&run));
        }
        Mode::Sweep => {
            let grid = cfg.r_grid.clone().unwrap_or_else(default_sweep_grid);
            report.sweep = Some(min_blowup_sweep(&pulse_profile(cfg)?, &grid, oracle_options(cfg))?);
        }
    }
    report.files = files.iter().map(|(n, _)| n.clone()).collect();
    Ok(Outcome { report, files })
}

/// Writes `report.json` and the curve files into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<(), CliError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, bytes) in &outcome.files {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(io(&p))?;
    }
    let p = dir.join("report.json");
    fs::write(&p, outcome.report.to_json()).map_err(io(&p))?;
    Ok(())
}
