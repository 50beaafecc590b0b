use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dincl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dincl")).args(args).output().expect("binary runs")
}

fn results(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap()).unwrap()
}

const HARMONIC_SHORT: &str = r#"{
  "name": "short",
  "system": {
    "drift": ["x2", "-x1"],
    "inputs": [{ "field": ["0", "1"], "bound": 0.1 }]
  },
  "initial": [[0.99, 1.01], [-0.01, 0.01]],
  "time": 0.5,
  "steps": 10
}"#;

#[test]
fn missing_scenario_file_is_a_validation_error() {
    let out = dincl(&["run", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn malformed_scenarios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{ not json"),
        ("unknown.json", &HARMONIC_SHORT.replace("\"steps\"", "\"stepz\"")),
        ("expr.json", &HARMONIC_SHORT.replace("\"-x1\"", "\"-x1 +\"")),
        ("dims.json", &HARMONIC_SHORT.replace("[[0.99, 1.01], [-0.01, 0.01]]", "[[0.99, 1.01]]")),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let out = dincl(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn region_violation_is_a_certification_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = HARMONIC_SHORT.replace("\"steps\": 10", "\"steps\": 10, \"region\": [[0.9, 1.1], [-0.1, 0.1]]");
    let path = dir.path().join("region.json");
    fs::write(&path, text).unwrap();
    let out = dincl(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("certification failed"));
}

#[test]
fn scenario_file_run_writes_results_and_polygons() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, HARMONIC_SHORT).unwrap();
    let out_dir = dir.path().join("out");
    let out = dincl(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--project",
        "0,1",
        "--mc-check",
        "20",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = results(&out_dir);
    assert_eq!(r["steps"], 10);
    assert_eq!(r["branches"].as_array().unwrap().len(), 1);
    assert_eq!(r["monte_carlo"]["violations"], 0);
    assert_eq!(r["step_log"].as_array().unwrap().len(), 10);
    assert!(r["step_log"][0]["eps"].as_f64().unwrap() > 0.0);
    assert!(out_dir.join("timing.json").exists());
    for k in 0..=10 {
        let csv = fs::read_to_string(out_dir.join(format!("branch0_t{k}.csv"))).unwrap();
        assert!(csv.starts_with("x,y\n"));
        assert!(csv.lines().count() >= 4);
    }
}

#[test]
fn results_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "run".to_string(),
            "--builtin".into(),
            "harmonic".into(),
            "--steps".into(),
            "20".into(),
            "--mc-check".into(),
            "30".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            d.to_str().unwrap().into(),
        ]
    };
    for d in [a.path(), b.path()] {
        let v = args(d);
        let out = dincl(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success());
    }
    assert_eq!(fs::read(a.path().join("results.json")).unwrap(), fs::read(b.path().join("results.json")).unwrap());
}

#[test]
fn harmonic_builtin_matches_published_diameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dincl(&[
        "run",
        "--builtin",
        "harmonic",
        "--steps",
        "100",
        "--noise",
        "0,0.1",
        "--delta",
        "0.01",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = results(dir.path())["hull"]["diameter"].as_f64().unwrap();
    assert!((d - 0.8382630).abs() / 0.8382630 < 0.05, "diameter {d}");
}

#[test]
fn vdp_builtin_reports_region_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = dincl(&["run", "--builtin", "vdp", "--time", "0.05", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = results(dir.path());
    let a = &r["analytic"];
    assert_eq!((a["k"].as_f64(), a["l"].as_f64(), a["lambda"].as_f64(), a["h"].as_f64()), (Some(20.0), Some(31.0), Some(27.0), Some(12.0)));
    assert_eq!(r["first_order"], "o3-single-input");
}

#[test]
fn split_flags_produce_branches() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = dincl(&["run", "--builtin", "harmonic", "--steps", "10", "--split", "1:0", "--split", "2:1", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let paths: Vec<String> =
        results(dir.path())["branches"].as_array().unwrap().iter().map(|b| b["path"].as_str().unwrap().to_string()).collect();
    assert_eq!(paths, ["00", "01", "10", "11"]);

    let bad = dincl(&["run", "--builtin", "harmonic", "--split", "1:5", "--out", d]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bad_noise_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dincl(&["run", "--builtin", "harmonic", "--noise", "0.1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parameter_table_prints_and_serializes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dincl(&["table", "param-T1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("65/6/70"));
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("param-T1.json")).unwrap()).unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn single_step_table_has_four_rows() {
    let out = dincl(&["table", "pho-T3"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("0.0420586"));
}

#[test]
fn builtins_round_trip_through_show() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["vdp", "vdp-nosplit", "harmonic", "rossler"] {
        let out = dincl(&["show", name]);
        assert!(out.status.success());
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, &out.stdout).unwrap();
        let check = dincl(&["run", path.to_str().unwrap(), "--time", "0.004", "--steps", "2", "--out", dir.path().to_str().unwrap()]);
        if name == "rossler" {
            assert_eq!(check.status.code(), Some(3));
            assert!(String::from_utf8_lossy(&check.stderr).contains("no crossing"));
        } else {
            assert!(check.status.success(), "{name}: {}", String::from_utf8_lossy(&check.stderr));
        }
    }
}

#[test]
fn results_validate_against_schema() {
    let schema: Value = serde_json::from_str(include_str!("../results.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let section = HARMONIC_SHORT
        .replace("[-0.01, 0.01]]", "[0.09, 0.11]]")
        .replace("\"steps\": 10", "\"steps\": 10, \"section\": { \"coord\": 1, \"direction\": -1.0 }");
    let path = dir.path().join("section.json");
    fs::write(&path, section).unwrap();
    let d = dir.path().join("a");
    let runs: [Vec<&str>; 3] = [
        vec!["run", path.to_str().unwrap(), "--mc-check", "10"],
        vec!["run", "--builtin", "harmonic", "--steps", "8", "--split", "0.5:0"],
        vec!["run", "--builtin", "vdp", "--time", "0.02"],
    ];
    for (k, mut args) in runs.into_iter().enumerate() {
        args.extend(["--out", d.to_str().unwrap()]);
        let out = dincl(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let r = results(&d);
        let errors: Vec<String> = validator.iter_errors(&r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        assert_eq!(r.get("crossing").is_some(), k == 0);
        assert_eq!(r.get("analytic").is_some(), k == 2);
    }
}
