use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scene(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenes")
        .join(name)
        .display()
        .to_string()
}

fn kosmann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kosmann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--json");
    let out = kosmann(&full);
    let report = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    (out.status.code().unwrap(), report)
}

fn residual(report: &Value, check: usize) -> f64 {
    report["checks"][check]["residual"].as_f64().unwrap()
}

#[test]
fn boost_is_killing() {
    let (code, r) = json(&["check-killing", &scene("minkowski.json"), "--field", "boost01"]);
    assert_eq!(code, 0);
    assert_eq!(residual(&r, 0), 0.0);
    assert_eq!(r["passed"], Value::Bool(true));
}

#[test]
fn dilation_is_not_killing_but_conformal() {
    let (code, r) = json(&["check-killing", &scene("minkowski.json"), "--field", "dilation"]);
    assert_eq!(code, 1);
    let norm = r["checks"][0]["data"]["metric_norm"].as_f64().unwrap();
    assert_eq!(residual(&r, 0), 2.0 * norm);
    let (code, _) = json(&["check-conformal", &scene("minkowski.json"), "--field", "dilation"]);
    assert_eq!(code, 0);
}

#[test]
fn penrose_dilation_negates_constant_spinor() {
    let (code, r) = json(&["lie-spinor", &scene("minkowski.json"), "--field", "dilation", "--lift", "penrose"]);
    assert_eq!(code, 0);
    let first = &r["checks"][0]["data"]["values"][0];
    let want = [[-1.0, 0.0], [0.0, -1.0], [-0.5, 0.0], [0.0, 0.5]];
    for (k, [re, im]) in want.into_iter().enumerate() {
        assert_eq!(first[k][0].as_f64().unwrap(), re);
        assert_eq!(first[k][1].as_f64().unwrap(), im);
    }
}

#[test]
fn sphere_rotation_passes_every_group_and_the_oracle() {
    let s = scene("sphere.json");
    for group in ["so", "cso", "gl"] {
        let (code, _) = json(&["check-gkilling", &s, "--field", "rot_x", "--group", group]);
        assert_eq!(code, 0, "{group}");
    }
    let (code, r) = json(&["check-killing", &s, "--field", "rot_y", "--oracle"]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
    let (code, _) = json(&["lie-spinor", &s, "--field", "rot_y", "--lift", "kosmann"]);
    assert_eq!(code, 0);
}

#[test]
fn polar_density_matches_oracle() {
    let (code, _) = json(&[
        "lie-tensor",
        &scene("polar.json"),
        "--field",
        "translation_x",
        "--target",
        "0,0,1;x0^2",
        "--oracle",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn matrix_decomposition_from_file() {
    let dir = std::env::temp_dir().join(format!("kosmann-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.json");
    std::fs::write(&path, "[[1, 2], [3, 4]]").unwrap();
    let (code, r) = json(&["decompose-matrix", "--matrix", path.to_str().unwrap(), "--signature", "1,1"]);
    assert_eq!(code, 0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == Value::Bool(true)));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn algebra_checks() {
    for sig in ["1,3", "2,2", "0,2"] {
        assert_eq!(json(&["verify-clifford", "--signature", sig]).0, 0);
        assert_eq!(json(&["verify-projectors", "--signature", sig]).0, 0);
    }
}

#[test]
fn malformed_input_exits_two() {
    for args in [
        vec!["check-killing".to_string(), "no-such-scene.json".into(), "--field".into(), "x".into()],
        vec!["check-killing".into(), scene("minkowski.json"), "--field".into(), "nope".into()],
        vec!["verify-clifford".into(), "--signature".into(), "2,1".into()],
        vec!["verify-clifford".into(), "--signature".into(), "two".into()],
        vec!["lie-tensor".into(), scene("polar.json"), "--field".into(), "rotation".into(), "--target".into(), "1,0,0;x0".into()],
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = kosmann(&refs);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn reports_are_deterministic_without_timing() {
    let args = ["check-conformal", &scene("minkowski.json"), "--field", "special_conformal0", "--json"];
    let a = kosmann(&args).stdout;
    let b = kosmann(&args).stdout;
    assert_eq!(a, b);
    let (_, r) = json(&["check-conformal", &scene("minkowski.json"), "--field", "special_conformal0", "--timing"]);
    assert!(r["timing_ms"].is_u64());
}

#[test]
fn tolerance_override_applies() {
    let (code, r) = json(&["check-killing", &scene("minkowski.json"), "--field", "dilation", "--tol", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"][0]["tolerance"].as_f64().unwrap(), 3.0);
}
