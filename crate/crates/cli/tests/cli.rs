//! End-to-end runs of the binary: output, files and exit codes.

use std::fs;
use std::process::{Command, Output};

fn fracpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn eigen_prints_lambda1_and_writes_e1() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracpl(&["eigen", "--n", "40", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!(v["lambda1"].as_f64().unwrap() > 0.0);
    assert!(v["e1_min"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(dir.path().join("e1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn solve_exports_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracpl(&["solve", "--n", "50", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["report", "manifest"] {
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
    for name in ["e1", "u0", "u1", "v0", "v1", "u_tilde", "u_plus", "v_minus"] {
        let csv = fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 51, "{name}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, r#"{ "n": 30, "p": 2.0, "s": 0.4 }"#).unwrap();
    let cfg = path.to_str().unwrap();
    let from_file = stdout_json(&fracpl(&["eigen", "--config", cfg]));
    let overridden = stdout_json(&fracpl(&["eigen", "--config", cfg, "--s", "0.3"]));
    let direct = stdout_json(&fracpl(&["eigen", "--n", "30", "--s", "0.3"]));
    assert_ne!(from_file["lambda1"], overridden["lambda1"]);
    assert_eq!(overridden["lambda1"], direct["lambda1"]);
}

#[test]
fn invalid_configuration_exits_with_4() {
    assert_eq!(
        fracpl(&["eigen", "--p", "3", "--s", "0.5"]).status.code(),
        Some(4)
    );
    assert_eq!(fracpl(&["eigen", "--n", "1"]).status.code(), Some(4));
    assert_eq!(fracpl(&["eigen", "--bogus"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{ "unknown_field": 1 }"#).unwrap();
    assert_eq!(
        fracpl(&["eigen", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn failed_audit_exits_with_2() {
    // η below λ₁ violates the asymptotic slope condition.
    let out = fracpl(&["audit", "--n", "40", "--eta", "1.0", "--gamma", "2.5"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["passed"] == false));
    let solve = fracpl(&["solve", "--n", "40", "--eta", "1.0", "--gamma", "2.5"]);
    assert_eq!(solve.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_nonzero() {
    let out = fracpl(&["eigen", "--config", "/nonexistent/run.json"]);
    assert!(!out.status.success());
}
