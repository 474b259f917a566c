use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagdelta")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn delta_of_totally_geodesic_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "zero.json", r#"{"n": 4, "c": 1, "h": []}"#);
    let o = run(&["delta", "--input", &p, "--tuple", "2,2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["delta"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["tuple"], serde_json::json!([2, 2]));
}

#[test]
fn delta_of_exotic_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "exotic.json", &lagdelta::lagrangian::exotic_s3_point::<f64>().to_json());
    let o = run(&["delta", "--input", &p, "--tuple", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.json", r#"{"n": 4, "c": 1, "h": []}"#);
    let bad = write(dir.path(), "bad.json", "{not json");
    assert_eq!(code(&run(&["delta", "--input", &zero, "--tuple", "5"])), 2);
    assert_eq!(code(&run(&["delta", "--input", &bad, "--tuple", "2"])), 2);
    assert_eq!(code(&run(&["delta", "--input", &zero, "--example", "exotic-s3", "--tuple", "2"])), 2);
    assert_eq!(code(&run(&["verify", "no-such-example"])), 2);
    assert_eq!(code(&run(&["verify", "exotic-s3", "--samples", "0"])), 2);
    assert_eq!(code(&run(&["audit", "--n", "4", "--count", "0"])), 2);
    assert_eq!(code(&run(&["audit", "--n", "7", "--count", "1"])), 2);
    assert_eq!(code(&run(&["evaluate", "--input", &zero, "--tuple", "2,2", "--variant", "improved"])), 2);
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "exotic-s3", "--samples", "5", "--seed", "9"]);
    let b = run(&["verify", "exotic-s3", "--samples", "5", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let csv = run(&["verify", "thm-9.2", "--samples", "3", "--format", "csv"]);
    assert_eq!(code(&csv), 0);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 4);
}

#[test]
fn evaluate_auto_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--example", "graph-8.2", "--tuple", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["variant"], "IMPROVED");
    assert!((v["delta"].as_f64().unwrap() - 11.375).abs() < 1e-5);
    assert_eq!(v["equality"], true);
}

#[test]
fn audit_is_deterministic() {
    let a = run(&["audit", "--n", "3..4", "--count", "4", "--seed", "42"]);
    let b = run(&["audit", "--n", "3..4", "--count", "4", "--seed", "42"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}
