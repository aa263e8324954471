use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn oplab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oplab"));
    cmd.args(args).env_remove("OPLAB_QUAD_POINTS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run_scenario(dir: &Path, text: &str, env: &[(&str, &str)]) -> Output {
    let scenario = dir.join("scenario.json");
    std::fs::write(&scenario, text).unwrap();
    let out = dir.join("out");
    oplab(&["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()], env)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn certificate(manifest: &Value, name: &str) -> f64 {
    manifest["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no certificate {name}"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn carleson_matches_pseudo_hyperbolic_products() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(dir.path(), r#"{"command": "carleson", "params": {"zeros": [0.5, [-0.2, 0.6], [0.1, -0.7]]}}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let zs = [(0.5, 0.0), (-0.2, 0.6), (0.1, -0.7)];
    let rho = |(a, b): (f64, f64), (c, d): (f64, f64)| {
        // |z − w|² / |1 − w̄z|² written out in real arithmetic
        let num = (a - c).powi(2) + (b - d).powi(2);
        let (re, im) = (1.0 - (c * a + d * b), -(c * b - d * a));
        (num / (re * re + im * im)).sqrt()
    };
    let expected = (0..3)
        .map(|i| (0..3).filter(|&k| k != i).map(|k| rho(zs[i], zs[k])).product::<f64>())
        .fold(f64::INFINITY, f64::min);
    let report = read_json(&dir.path().join("out/carleson.json"));
    let delta = report["delta"].as_f64().unwrap();
    assert!((delta - expected).abs() < 1e-14, "{delta} vs {expected}");
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["command"], "carleson");
    assert_eq!(manifest["passed"], true);
}

#[test]
fn flag_shortcut_matches_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let via_flags = dir.path().join("flags");
    let o = oplab(&["carleson", "--zeros", "0.5", "--zeros=-0.2,0.6", "--out", via_flags.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run_scenario(dir.path(), r#"{"command": "carleson", "params": {"zeros": [0.5, [-0.2, 0.6]]}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = std::fs::read(via_flags.join("carleson.json")).unwrap();
    let b = std::fs::read(dir.path().join("out/carleson.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_hashes_match_files() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "similarity", "params": {"random": {"dim": 5, "seed": 2}}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for f in outputs {
        let bytes = std::fs::read(dir.path().join("out").join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(manifest["seed"], 2);
}

#[test]
fn interpolate_recovers_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "interpolate", "params": {"nodes": [0.0, 0.5], "targets": [0.0, 0.5]}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&dir.path().join("out/interpolate.json"));
    assert!((report["norm"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(report["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn uncoupled_example_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "example41", "params": {"n": 3, "seed": 4, "coupling_scale": 0.0}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    for name in ["example41.intertwiner_residual", "example41.conjugation_residual", "example41.a_phi_oracle_agreement"] {
        assert_eq!(certificate(&manifest, name), 0.0, "{name}");
    }
}

#[test]
fn scan_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(
        dir.path(),
        r#"{"command": "lemerdy-scan", "params": {"sizes": [64, 256], "sequence": "log_harmonic", "seed": 1}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "{csv}");
    assert!(lines[1].starts_with("64,") && lines[2].starts_with("256,"), "{csv}");
    let json = read_json(&dir.path().join("out/scan.json"));
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn schema_error_exits_one_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "carleson", "params": {"zeros": [0.5, "half"]}}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zeros[1]"), "{}", stderr(&o));
    assert!(!dir.path().join("out/manifest.json").exists());
}

#[test]
fn missing_seed_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "example41", "params": {"n": 3}}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(oplab(&["carleson"], &[]).status.code(), Some(1));
    assert_eq!(oplab(&["carleson", "--zeros", "x"], &[]).status.code(), Some(1));
    assert_eq!(oplab(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn missing_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplab(&["run", dir.path().join("absent.json").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_on_the_circle_is_a_module_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "carleson", "params": {"zeros": [0.5, 1.0]}}"#, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn short_shift_window_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(
        dir.path(),
        r#"{"command": "theorem23", "params": {"geometric": 4, "shift_dim": 8, "seed": 1}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn quadrature_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "carleson", "params": {"zeros": [0.5]}}"#, &[("OPLAB_QUAD_POINTS", "512")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["quadrature_points"], 512);
}

#[test]
fn broken_quadrature_fails_selftest_and_example() {
    let o = oplab(&["selftest"], &[("OPLAB_QUAD_POINTS", "3")]);
    assert_eq!(o.status.code(), Some(2));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().any(|l| l.starts_with("scalar_fn") && l.contains("FAIL")), "{table}");
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(dir.path(), r#"{"command": "example41", "params": {"n": 3, "seed": 1}}"#, &[("OPLAB_QUAD_POINTS", "3")]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn selftest_passes() {
    let o = oplab(&["selftest"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
