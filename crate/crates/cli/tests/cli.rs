use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn rootreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rootreg")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn track_square_root_has_unit_l1_derivative() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "curve.json",
        &json!({"degree": 2, "domain": [0.0, 1.0], "family": {"kind": "builtin", "name": "power"}}),
    );
    let out = dir.path().join("run");
    let o = rootreg(&["track", "--config", &cfg, "--grid", "4096", "--p", "1", "--json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    // int_0^1 t^{-1/2} / 2 dt = 1
    for r in v["regularity"].as_array().unwrap() {
        assert!((r["lp_of_derivative"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    let csv = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert!(csv.starts_with("t,re0,im0,re1,im1\n"));
}

#[test]
fn norms_of_sampled_ramp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f.json", &json!({"grid": [0.0, 1.0], "values": [[0.0, 0.0], [1.0, 0.0]]}));
    let o = rootreg(&["norms", "--config", &cfg, "--p", "2", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    // (int t^2)^{1/2} = 3^{-1/2}
    assert!((v["lp"].as_f64().unwrap() - 3f64.powf(-0.5)).abs() < 1e-14);
}

#[test]
fn cover_and_glaeser_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "budget.json",
        &json!({"rate": 1.0, "d": 0.2, "domain": [0.0, 1.0],
                "radicals": [{"index": 2, "curve": {"kind": "poly", "coeffs": [[1.0, 0.0], [0.5, 0.0]]}}]}),
    );
    let o = rootreg(&["cover", "--config", &cfg, "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["max_overlap"].as_u64().unwrap() <= 2);

    let cfg = write(dir.path(), "interp.json", &json!({"m": 2, "alpha": 1.0, "a": 1.0, "b": 1.0}));
    let o = rootreg(&["glaeser", "--config", &cfg, "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    // nodes 1/2, 1: inverse Vandermonde row sums give 6
    assert!((v["constant_c"].as_f64().unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", &json!({"name": "no-such-experiment"}));
    let o = rootreg(&["experiment", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-experiment"));
    let o = rootreg(&["track"]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "bad.json", &json!({"degree": 2, "domain": [0.0, 1.0], "family": {"kind": "builtin", "name": "power", "exponent": "x"}}));
    let o = rootreg(&["track", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("family"));
}

#[test]
fn numeric_failure_exits_with_three_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "interp.json", &json!({"m": 40, "alpha": 1.0, "a": 1.0, "b": 1.0}));
    let o = rootreg(&["glaeser", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"], json!("singular_matrix"));
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", &json!({"name": "cover-demo", "instances": 3, "check_points": 200}));
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = rootreg(&["experiment", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], json!(9));
        assert!(out.join("cover_records.csv").exists());
        reports.push(std::fs::read(out.join("cover-demo.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
