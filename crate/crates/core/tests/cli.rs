//! End-to-end tests of the `qudit-bell` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qudit-bell"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn violation_scan_reports_violations() {
    let out = run(&["violation-scan", "--d-min", "2", "--d-max", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 4, "header plus one row per d");
    assert!(lines[0].starts_with("d,i_total,"));
    for (row, d) in lines[1..].iter().zip(2..) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], d.to_string());
        let i: f64 = fields[1].parse().unwrap();
        assert!(i > 3.0, "d = {d} should violate, got {i}");
        assert_eq!(*fields.last().unwrap(), "never-measured");
    }
}

#[test]
fn violation_scan_d2_calibration() {
    let out = run(&["violation-scan", "--d-min", "2", "--d-max", "2"]);
    let text = stdout(&out);
    let i: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((i - (2.0 + 2.0f64.sqrt())).abs() < 1e-6);
}

#[test]
fn identical_config_is_bit_identical() {
    let a = run(&["violation-scan", "--d-min", "2", "--d-max", "3", "--seed", "7"]);
    let b = run(&["violation-scan", "--d-min", "2", "--d-max", "3", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let aj = run(&["violation-scan", "--d-min", "2", "--d-max", "3", "--format", "json"]);
    let bj = run(&["violation-scan", "--d-min", "2", "--d-max", "3", "--format", "json"]);
    assert_eq!(aj.stdout, bj.stdout);
}

#[test]
fn json_round_trip_is_byte_identical() {
    for args in [
        vec!["violation-scan", "--d-min", "2", "--d-max", "3", "--format", "json"],
        vec!["process-compare", "--format", "json"],
        vec!["lhv-oracle", "--d-min", "2", "--d-max", "2", "--format", "json"],
        vec!["fine-test", "--fixture", "cglmp", "--format", "json"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}");
        let text = stdout(&out);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut re_emitted = serde_json::to_string_pretty(&value).unwrap();
        re_emitted.push('\n');
        assert_eq!(text, re_emitted, "round trip must be byte-identical for {args:?}");
    }
}

#[test]
fn json_meta_block_present() {
    let out = run(&["violation-scan", "--d-min", "2", "--d-max", "2", "--format", "json", "--seed", "11"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let meta = &value["meta"];
    assert_eq!(meta["seed"], 11);
    assert!(meta["version"].is_string());
    assert_eq!(meta["tolerances"]["behavior_eq"], 1e-8);
    assert_eq!(meta["offsets"]["alpha_2"], 0.5);
}

#[test]
fn process_compare_commuting_fixture_coincides() {
    let out = run(&["process-compare", "--fixture", "commuting"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let totals: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(totals.len(), 3);
    assert!((totals[0] - totals[1]).abs() < 1e-10);
    assert!((totals[0] - totals[2]).abs() < 1e-10);
}

#[test]
fn process_compare_cglmp_fixture_differs() {
    let out = run(&["process-compare"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    for label in ["unrecorded-first", "unrecorded-second", "never-measured"] {
        assert_eq!(
            lines.iter().filter(|l| l.starts_with(&format!("{label},"))).count(),
            1,
            "{label} must appear exactly once"
        );
    }
    let max_delta: f64 = lines[1].split(',').last().unwrap().parse().unwrap();
    assert!(max_delta > 1e-3);
}

#[test]
fn lhv_oracle_reports_bound_three() {
    let out = run(&["lhv-oracle", "--d-min", "2", "--d-max", "4"]);
    assert!(out.status.success());
    for row in stdout(&out).trim_end().lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        let max_i: f64 = fields[1].parse().unwrap();
        let count: usize = fields[2].parse().unwrap();
        assert_eq!(max_i, 3.0);
        assert!(count > 0, "maximizer list must be nonempty");
        assert!(!fields[3].is_empty());
    }
}

#[test]
fn lhv_oracle_guards_large_d() {
    let out = run(&["lhv-oracle", "--d-min", "2", "--d-max", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("d <= 4"));
}

#[test]
fn fine_test_fixtures() {
    let feasible = run(&["fine-test", "--fixture", "product"]);
    assert!(feasible.status.success());
    let row = stdout(&feasible);
    assert!(row.contains(",feasible,"), "{row}");
    assert!(row.trim_end().ends_with("true"), "LPs must agree: {row}");

    let infeasible = run(&["fine-test", "--fixture", "cglmp"]);
    assert!(infeasible.status.success());
    let row = stdout(&infeasible);
    assert!(row.contains(",infeasible,"), "{row}");
    assert!(row.trim_end().ends_with("true"), "LPs must agree: {row}");
}

#[test]
fn fine_test_feasible_json_certificate() {
    let out = run(&["fine-test", "--fixture", "product", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["vertex_lp_verdict"], "feasible");
    let weights = value["certificate"]["weights"].as_array().unwrap();
    assert!(!weights.is_empty());
    let total: f64 = weights.iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn fine_test_reads_behavior_file() {
    let dir = std::env::temp_dir().join("qudit-bell-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("uniform.json");
    let uniform = r#"{"d": 2, "joints": {
        "A1B1": [[0.25, 0.25], [0.25, 0.25]],
        "A1B2": [[0.25, 0.25], [0.25, 0.25]],
        "A2B1": [[0.25, 0.25], [0.25, 0.25]],
        "A2B2": [[0.25, 0.25], [0.25, 0.25]]
    }}"#;
    std::fs::write(&path, uniform).unwrap();
    let out = run(&["fine-test", "--input", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains(",feasible,"));
}

#[test]
fn fine_test_rejects_malformed_input() {
    let dir = std::env::temp_dir().join("qudit-bell-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("malformed.json");
    std::fs::write(&path, r#"{"d": 2, "joints": {"A1B1": [[0.5, 0.5]]}}"#).unwrap();
    let out = run(&["fine-test", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("behavior JSON") || stderr(&out).contains("A1B1"));
}

#[test]
fn fine_test_rejects_signaling_input() {
    let dir = std::env::temp_dir().join("qudit-bell-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("signaling.json");
    // A's marginal depends on B's setting: signaling.
    let signaling = r#"{"d": 2, "joints": {
        "A1B1": [[0.5, 0.0], [0.0, 0.5]],
        "A1B2": [[0.9, 0.0], [0.0, 0.1]],
        "A2B1": [[0.25, 0.25], [0.25, 0.25]],
        "A2B2": [[0.25, 0.25], [0.25, 0.25]]
    }}"#;
    std::fs::write(&path, signaling).unwrap();
    let out = run(&["fine-test", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("no-signaling"), "{err}");
}

#[test]
fn invalid_d_range_is_validation_error() {
    let out = run(&["violation-scan", "--d-min", "1", "--d-max", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["violation-scan", "--d-min", "3", "--d-max", "9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("qudit-bell-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.csv");
    let out = run(&["violation-scan", "--d-min", "2", "--d-max", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("d,i_total,"));
}
