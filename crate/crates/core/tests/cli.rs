//! End-to-end checks of the patrolsynth binary: exit codes, output formats,
//! and the strategy-file round trip into simulate.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patrolsynth"))
}

fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn bound_text_output() {
    let out = bin().arg("bound").arg(spec_path("example1.json")).args(["-k", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("protection upper bound: 0.666666666"), "{text}");
}

#[test]
fn bound_json_output() {
    let out = bin()
        .arg("bound")
        .arg(spec_path("example2.json"))
        .args(["-k", "2", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["rho"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn compare_reports_both_levels() {
    let out = bin()
        .arg("compare")
        .arg(spec_path("example1.json"))
        .args(["-k", "1", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["level_modular"].as_f64().unwrap() - 0.618034).abs() < 1e-5);
    assert!((v["level_naive"].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-9);
}

#[test]
fn patrollers_command() {
    let out = bin()
        .arg("patrollers")
        .arg(spec_path("example2.json"))
        .args(["--protection", "5", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["k_bound"].as_u64().unwrap(), 2);
    assert_eq!(v["k_modular"].as_u64().unwrap(), 2);
}

#[test]
fn sweep_emits_csv_header() {
    let out = bin()
        .arg("sweep")
        .arg(spec_path("example2.json"))
        .args(["-k", "2", "--x-start", "1", "--x-stop", "2", "--x-step", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,bound,level_eta,level_sigma"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn synthesize_then_simulate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let strategy_path = dir.path().join("strategy.json");
    let out = bin()
        .arg("synthesize")
        .arg(spec_path("example2.json"))
        .args(["-k", "2", "--output"])
        .arg(&strategy_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(strategy_path.exists());

    let out = bin()
        .arg("simulate")
        .arg(&strategy_path)
        .arg(spec_path("example2.json"))
        .args(["--record", "0", "--trials", "5000", "--seed", "7", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"].as_u64().unwrap(), 5000);
    // Cheapest retained set (cost 2) is protected at level 5: damage 1.
    assert!((v["mean_damage"].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn invalid_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"detection_prob": 2.0, "groups": []}"#).unwrap();
    let out = bin().arg("bound").arg(&bad).args(["-k", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_target_exits_3() {
    let out = bin()
        .arg("patrollers")
        .arg(spec_path("example1.json"))
        .args(["--protection", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_exits_4() {
    let out = bin().arg("bound").arg("/nonexistent/spec.json").args(["-k", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mismatched_strategy_and_spec_fail() {
    let dir = tempfile::tempdir().unwrap();
    let strategy_path = dir.path().join("strategy.json");
    let out = bin()
        .arg("synthesize")
        .arg(spec_path("example1.json"))
        .args(["-k", "1", "--output"])
        .arg(&strategy_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .arg("simulate")
        .arg(&strategy_path)
        .arg(spec_path("example2.json"))
        .args(["--record", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
