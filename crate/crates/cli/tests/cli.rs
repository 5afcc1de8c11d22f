use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cold-plasma"));
    c.env_remove("COLD_PLASMA_OUT");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gauss_pulse_smooth_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["gauss-pulse", "--k", "0.15"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pulse"]["verdict"], "SmoothFirstPeriod");
    assert!((r["pulse"]["k_smooth"].as_f64().unwrap() - 0.1529).abs() < 3e-4);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn count_revolutions_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k01.toml");
    fs::write(&cfg, "mode = \"count-revolutions\"\nk_pulse = 0.1\nstart_lambda = 0.1\nt_max = 25.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["spiral"]["revolutions"], 3);
    assert!(r["oracle"]["revolutions"].as_u64().unwrap() >= 3);
    let outer = fs::read_to_string(out_dir.join("spiral_outer.csv")).unwrap();
    let mut lines = outer.lines();
    assert_eq!(lines.next().unwrap(), "curve_id,s,t,lambda,D");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "L");
    assert_eq!(first[3].parse::<f64>().unwrap(), 0.1);
    assert_eq!(first[4].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(&cfg, "mode = \"gauss-pulse\"\nk_pulse = 0.15\n").unwrap();
    let out = bin().args(["gauss-pulse", "--config"]).arg(&cfg).args(["--k", "0.29", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(report(&out)["pulse"]["verdict"], "BlowUpFirstPeriod");
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "mode = \"sweep\"\nk_pulse = 0.1\nbogus_key = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out_dir.exists());
}

#[test]
fn invalid_values_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for args in [
        vec!["oracle-run", "--k", "0.7"],
        vec!["criterion-1d", "--v0-prime", "0.1"],
        vec!["count-revolutions", "--k", "0.1", "--tol", "-1"],
    ] {
        let out = run_in(&out_dir, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out_dir.exists());
    }
    let out = run_in(&out_dir, &["gauss-pulse", "--k", "0.2", "--sigma1", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mismatched_mode_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(&cfg, "mode = \"sweep\"\nk_pulse = 0.1\n").unwrap();
    let out = bin().args(["gauss-pulse", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["count-revolutions", "--k", "0.1", "--t-max", "20", "--samples", "30"];
    assert_eq!(run_in(&a, &args).status.code(), Some(0));
    assert_eq!(run_in(&b, &args).status.code(), Some(0));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        let (x, y) = (fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap());
        assert_eq!(x, y, "{n:?}");
    }
}

#[test]
fn output_dir_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["first-period", "--d0", "-0.1", "--lambda0", "0.1"])
        .env("COLD_PLASMA_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["criterion"]["verdict"], "Satisfied");
}

#[test]
fn criterion_1d_runs_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["criterion-1d", "--v0-prime", "-1.2", "--e0-prime", "0.0", "--t-max", "20"]);
    let r = report(&out);
    assert_eq!(r["criterion"]["verdict"], "Violated");
    assert_eq!(r["oracle"]["blowup"]["detected"], true);
}

#[test]
fn sweep_reports_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sweep", "--k", "0.45", "--r-grid", "0,0.5,1", "--t-max", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["sweep"]["points"].as_array().unwrap().len(), 3);
}

#[test]
fn timing_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let plain = report(&run_in(dir.path(), &["gauss-pulse", "--k", "0.1"]));
    assert!(plain.get("wall_clock_s").is_none());
    let timed = report(&run_in(dir.path(), &["gauss-pulse", "--k", "0.1", "--timing"]));
    assert!(timed["wall_clock_s"].as_f64().is_some());
}
