use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn modmetric(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modmetric"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const FIXPOINT: &str = r#"{
  "space": {"kind": "euclidean", "dim": 1},
  "modular": {"kind": "average_speed"},
  "task": {"op": "fixpoint", "map": "halving", "x0": [1.0], "lambda": 1.0, "tol": 1e-8}
}"#;

#[test]
fn fixpoint_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", FIXPOINT);
    let a = modmetric(dir.path(), &["fixpoint", "--config", "c.json", "--seed", "7"]);
    let b = modmetric(dir.path(), &["fixpoint", "--config", "c.json", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["header"]["tool"], "modmetric");
    assert!(report["header"]["config_hash"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(report["results"][0]["detail"]["n_iters"], 27);
}

#[test]
fn workers_do_not_change_report() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"space": {"kind": "euclidean", "dim": 2}, "modular": {"kind": "step"},
            "task": {"op": "check", "properties": ["axiom1", "triangle3", "convexity"]},
            "plan": {"n_samples": 300}}"#,
    );
    let one = modmetric(dir.path(), &["check", "--config", "c.json", "--workers", "1"]);
    let four = modmetric(dir.path(), &["check", "--config", "c.json", "--workers", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"space": {"kind": "euclidean", "dim": 1}, "modular": {"kind": "metric_as_modular"},
            "task": {"op": "check", "properties": ["convexity"]}}"#,
    );
    let out = modmetric(dir.path(), &["check", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["status"], "fail");
    assert!(report["results"][0]["violations"].as_u64().unwrap() > 0);
}

#[test]
fn malformed_map_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "islands.txt", "##.\n#x#\n");
    write(
        dir.path(),
        "c.json",
        r#"{"space": {"kind": "landmass", "map": "islands.txt"}, "modular": {"kind": "average_speed"},
            "task": {"op": "partition"}}"#,
    );
    let out = modmetric(dir.path(), &["partition", "--config", "c.json", "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn landmass_partition_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "islands.txt", "##..#\n##..#\n....#\n");
    write(
        dir.path(),
        "c.json",
        r#"{"space": {"kind": "landmass", "map": "islands.txt"}, "modular": {"kind": "average_speed"},
            "task": {"op": "partition"}}"#,
    );
    let out = modmetric(dir.path(), &["partition", "--config", "c.json", "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let entry = report["results"].as_array().unwrap().iter().find(|e| e["name"] == "partition_star").unwrap();
    assert_eq!(entry["detail"]["count"], 2);
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "unknown.json",
        r#"{"space": {"kind": "euclidean", "dim": 1}, "modular": {"kind": "average_speed"},
            "task": {"op": "check"}, "colour": "blue"}"#,
    );
    write(
        dir.path(),
        "negative.json",
        r#"{"space": {"kind": "euclidean", "dim": 1}, "modular": {"kind": "average_speed"},
            "task": {"op": "contract", "map": "halving", "k": 0.5, "lambda0": -1}}"#,
    );
    let unknown = modmetric(dir.path(), &["check", "--config", "unknown.json"]);
    assert_eq!(unknown.status.code(), Some(2));
    let negative = modmetric(dir.path(), &["contract", "--config", "negative.json"]);
    assert_eq!(negative.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&negative.stderr).contains("lambda0"));
    let missing = modmetric(dir.path(), &["check", "--config", "absent.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let mismatch = modmetric(dir.path(), &["fixpoint", "--config", "unknown.json"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn text_format() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", FIXPOINT);
    let out = modmetric(dir.path(), &["fixpoint", "--config", "c.json", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("modmetric "));
    assert!(text.contains("[pass] fixpoint"));
    assert!(text.trim_end().ends_with("summary: pass (1 entries, 0 failed, 0 violations, 0 errors)"));
}
