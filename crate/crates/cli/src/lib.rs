//! Batch runner: scenario configs in, JSON reports and curve CSVs out.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.

pub mod config;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{FamilyChoice, FplusChoice, Mode, ScenarioConfig};
pub use error::CliError;
pub use pipeline::{run, write_outcome, AnalysisReport, Outcome};

pub const OUT_ENV: &str = "COLD_PLASMA_OUT";

#[derive(Debug, Parser)]
#[command(name = "cold-plasma", version, about = "Smoothness and breaking bounds for cold-plasma oscillations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the mode named in the config file.
    Run(Overrides),
    /// Sign of `(V')^2 + 2E' - 1` for one-dimensional point data.
    #[command(name = "criterion-1d")]
    Criterion1d(Overrides),
    /// First-period criterion for plain or irrotational data.
    FirstPeriod(Overrides),
    /// Pulse thresholds and the verdict for one amplitude.
    GaussPulse(Overrides),
    /// Certified revolutions and `[T_l, T_L]` for one characteristic.
    CountRevolutions(Overrides),
    /// As count-revolutions, plus the field lifetime over `r_grid`.
    Lifetime(Overrides),
    /// Integrate one characteristic of the Gaussian pulse.
    OracleRun(Overrides),
    /// Minimum blow-up time over a radius grid.
    Sweep(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML scenario file; flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for report.json and CSV files.
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
    #[arg(long = "k", alias = "k-pulse")]
    pub k_pulse: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Start on the axis at this lambda instead of `2K`.
    #[arg(long, allow_hyphen_values = true)]
    pub start_lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_d: Option<f64>,
    #[arg(long)]
    pub sigma1: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyChoice>,
    #[arg(long, value_enum)]
    pub fplus_rule: Option<FplusChoice>,
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long)]
    pub max_rev: Option<u32>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0_prime: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e0_prime: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub curl_norm_sq: Option<f64>,
}

impl Command {
    fn split(&self) -> (Option<Mode>, &Overrides) {
        match self {
            Command::Run(o) => (None, o),
            Command::Criterion1d(o) => (Some(Mode::Criterion1d), o),
            Command::FirstPeriod(o) => (Some(Mode::FirstPeriod), o),
            Command::GaussPulse(o) => (Some(Mode::GaussPulse), o),
            Command::CountRevolutions(o) => (Some(Mode::CountRevolutions), o),
            Command::Lifetime(o) => (Some(Mode::Lifetime), o),
            Command::OracleRun(o) => (Some(Mode::OracleRun), o),
            Command::Sweep(o) => (Some(Mode::Sweep), o),
        }
    }
}

impl Overrides {
    fn apply(&self, c: &mut ScenarioConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f.clone(); } )* };
        }
        set!(r0, start_d, sigma1, sigma2, family, fplus_rule, dim, max_rev, t_max, tol, samples, curl_norm_sq);
        set_opt!(k_pulse, start_lambda, r_grid, v0_prime, e0_prime, d0, lambda0);
    }
}

/// Merges the config file, the subcommand and the flags into one scenario.
pub fn resolve(command: &Command) -> Result<(ScenarioConfig, PathBuf, bool), CliError> {
    let (mode, o) = command.split();
    let mut cfg = match &o.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            ScenarioConfig::from_toml(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(m) = mode {
        match cfg.mode {
            Some(file_mode) if file_mode != m => {
                return Err(CliError::Config(format!(
                    "config mode {} does not match subcommand {}",
                    file_mode.as_str(),
                    m.as_str()
                )))
            }
            _ => cfg.mode = Some(m),
        }
    }
    o.apply(&mut cfg);
    cfg.validate()?;
    let out = o.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("cold-plasma-out"));
    Ok((cfg, out, o.timing))
}

fn execute(command: &Command) -> Result<String, CliError> {
    let (cfg, out, timing) = resolve(command)?;
    let clock = Instant::now();
    let mut outcome = run(&cfg)?;
    if timing {
        outcome.report.wall_clock_s = Some(clock.elapsed().as_secs_f64());
    }
    write_outcome(&outcome, &out)?;
    Ok(outcome.report.to_json())
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(json) => {
            print!("{json}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
