use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_aniso-tv");

const SMOOTH: &str = r#"{
  "schema_version": 1,
  "domain": {"kind": "rect", "bbox": [0, 0, 1, 1], "h": 0.125},
  "integrand": {"name": "isotropic"},
  "measure": {"density": "0.5 * sgn(x - 0.5)"},
  "datum": "x"
}"#;

// total load -100 on the unit square against a boundary perimeter of 4
const VIOLATING: &str = r#"{
  "schema_version": 1,
  "domain": {"kind": "rect", "bbox": [0, 0, 1, 1], "h": 0.25},
  "measure": {"density": "-100"}
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ANISO_TV_SEED").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn gallery_til1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("til1.json");
    let o = run(&["gallery", "run", "til1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["scenario"], "til1");
    assert_eq!(r["passed"], true);
}

#[test]
fn missing_scenario_file_is_a_usage_error() {
    let o = run(&["ic-check", "--mode", "dual", "missing.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(code(&run(&["solve", "--functional", "psi", "--scenario", "x.json"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["gallery", "run", "unknown"])), 2);
    assert_eq!(code(&run(&["gallery", "run", "til1", "--set", "bogus=1"])), 2);
    assert_eq!(code(&run(&["gallery", "run", "--all", "--config", r#"{"nope": {}}"#])), 2);
    assert_eq!(code(&run(&["gallery", "run", "signed-ic", "--set", "theta=3"])), 2);
}

#[test]
fn violating_data_reports_unboundedness() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "bad.json", VIOLATING);
    let rep = dir.path().join("r.json");
    let o = run(&["solve", "--functional", "phi-hat", "--scenario", &sc, "--report", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(r["status"], "unbounded_detected");

    // the same data fails the condition itself
    let o = run(&["ic-check", &sc, "--mode", "exhaustive", "--h", "0.5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["report"]["verdict"], "violated");
}

#[test]
fn solve_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", SMOOTH);
    let rep = dir.path().join("r.json");
    let csv = dir.path().join("m.csv");
    let o = run(&[
        "solve",
        "--functional",
        "phi",
        "--scenario",
        &sc,
        "--method",
        "level-cut",
        "--report",
        rep.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["status"], "converged");
    assert_eq!(r["cells"], 64);
    // the echoed scenario is the parsed input
    let echoed: Value = r["scenario"].clone();
    let parsed = aniso_tv::scenario::Scenario::from_json(SMOOTH).unwrap();
    assert_eq!(echoed, serde_json::to_value(&parsed).unwrap());

    let mut rd = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["cell", "x", "y", "value"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 64);
    let values: Vec<f64> = r["report"]["minimizer"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (row, v) in rows.iter().zip(&values) {
        assert_eq!(row[3].parse::<f64>().unwrap(), *v);
    }
}

#[test]
fn snapshots_follow_the_stride() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", SMOOTH);
    let o = run(&["solve", "--functional", "phi", "--scenario", &sc, "--snapshot-stride", "64"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let snaps = r["report"]["snapshots"].as_array().unwrap();
    assert!(!snaps.is_empty());
    assert!(snaps.iter().all(|s| s[0].as_u64().unwrap() % 64 == 0));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", SMOOTH);
    let args = ["solve", "--functional", "phi", "--scenario", &sc, "--method", "level-cut"];
    let o = Command::new(BIN).args(args).env("ANISO_TV_SEED", "42").output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["config"]["seed"], 42);
    let o = Command::new(BIN).args(args).env("ANISO_TV_SEED", "abc").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn perimeters_of_the_unit_triangle() {
    let tri = r#"{"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}"#;
    let o = run(&["perimeter", "--shape", tri, "--integrand", "quadrant"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["perimeter"], 4.0);
    let o = run(&["perimeter", "--shape", tri, "--integrand", "quadrant", "--mirrored"]);
    let p = stdout_json(&o)["perimeter"].as_f64().unwrap();
    assert!((p - (2.0 + 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn measure_of_fractal_levels() {
    let curve = r#"{"support": {"kind": "fractal", "level": 6}, "density": 2.8284271247461903}"#;
    for k in ["0", "3"] {
        let shape = format!(r#"{{"kind": "fractal", "level": {k}}}"#);
        let o = run(&["measure", "--curve", curve, "--shape", &shape]);
        assert_eq!(code(&o), 0);
        let m = stdout_json(&o)["mass"].as_f64().unwrap();
        assert!((m - 4.0).abs() < 1e-9, "level {k}: {m}");
    }
}

#[test]
fn certificates_and_coarea() {
    let o = run(&["certificate", "--field", "two-circles", "--theta", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["report"]["pass"], true);
    let o = run(&["coarea-test", "--cases", "200", "--integrand", "weighted-l1", "--coefficients", "1,3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["failures"], 0);
}

#[test]
fn certificate_mode_cross_checks() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", SMOOTH);
    let o = run(&["ic-check", &sc, "--mode", "certificate", "--h", "0.25", "--samples", "50"]);
    let r = stdout_json(&o);
    assert_eq!(r["report"]["verdict"], "holds");
    assert_eq!(r["cross_check"]["inconsistent"], false);
    assert_eq!(r["cross_check"]["samples"], 52);
    assert_eq!(code(&o), 0);
    let o = run(&["ic-check", &sc, "--mode", "dual", "--small-volume", "0,0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gallery_list_json() {
    let o = run(&["gallery", "list", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 8);
}
