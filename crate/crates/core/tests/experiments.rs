use rootreg::experiments::{parse_config, run_experiment, write_outputs};
use serde_json::{json, Value};

#[test]
fn output_directory_lists_every_file() {
    let req = parse_config(&json!({"name": "cover-demo", "seed": 9, "instances": 3, "check_points": 200})).unwrap();
    let out = run_experiment(&req).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &req, &out).unwrap();
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], json!("cover-demo"));
    assert_eq!(manifest["seed"], json!(9));
    assert_eq!(manifest["config"]["instances"], json!(3));
    for file in manifest["files"].as_array().unwrap() {
        assert!(dir.path().join(file.as_str().unwrap()).is_file(), "{file} missing");
    }
    let report = std::fs::read_to_string(dir.path().join("cover-demo.json")).unwrap();
    assert_eq!(report, out.report_json());
}

#[test]
fn seed_changes_sampled_instances() {
    let run = |seed: u64| {
        let req = parse_config(&json!({"name": "cover-demo", "seed": seed, "instances": 2, "check_points": 100})).unwrap();
        run_experiment(&req).unwrap().report_json()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}

#[test]
fn bad_configs_are_rejected() {
    for cfg in [
        json!([1, 2]),
        json!({"name": "nope"}),
        json!({"name": "monodromy", "edge_points": "many"}),
        json!({"name": "sharpness", "extra": 1}),
        json!({"name": "cover-demo", "d_range": [0.3, 0.1]}),
    ] {
        let bad = parse_config(&cfg).and_then(|r| run_experiment(&r).map(|_| ()));
        assert!(bad.is_err(), "{cfg} accepted");
    }
}
