use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn lab_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn entry_prints_scalar() {
    let out = lab(&["entry", "--m", "3", "--dim", "4", "--lambda", "1", "--index", "1,1,2"]);
    assert_eq!(stdout(&out).trim(), "0.2");
}

#[test]
fn entry_out_of_range_is_one_line_diagnostic() {
    let out = lab(&["entry", "--m", "3", "--dim", "4", "--lambda", "1", "--index", "1,1,4"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1);
    assert!(err.starts_with("error:"));
}

#[test]
fn apply_both_agrees_with_enumeration() {
    let v = json(&lab(&[
        "apply", "--m", "3", "--dim", "2", "--lambda", "1", "--input", "[1,1]", "--method", "both",
    ]));
    // Sums over (j, k) in {0,1}^2 of 1/(i+j+k+1).
    let expected = [1.0 + 2.0 / 2.0 + 1.0 / 3.0, 1.0 / 2.0 + 2.0 / 3.0 + 1.0 / 4.0];
    for key in ["naive", "fast"] {
        for (got, want) in v[key].as_array().unwrap().iter().zip(expected) {
            assert!((got.as_f64().unwrap() - want).abs() <= 1e-15);
        }
    }
    assert!(v["max_rel_diff"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn form_of_one_by_one() {
    let v = json(&lab(&[
        "form", "--m", "2", "--dim", "1", "--lambda", "1", "--input", "[1]",
    ]));
    assert_eq!(v.as_f64(), Some(1.0));
}

#[test]
fn bounds_reports() {
    let v = json(&lab(&["bounds", "--m", "2", "--dim", "10", "--lambda", "1"]));
    assert!((v["C"].as_f64().unwrap() - 10.0 * (PI / 10.0).sin()).abs() <= 1e-15);
    assert_eq!(v["M"].as_f64(), Some(PI));
    assert_eq!(v["branch"], "lambda>=1");

    let v = json(&lab(&["bounds", "--m", "3", "--dim", "4", "--lambda", "0.25"]));
    assert_eq!(v["C"].as_f64(), Some(16.0));
    assert!((v["M"].as_f64().unwrap() - PI * 2f64.sqrt()).abs() <= 1e-14);

    let v = json(&lab(&["bounds", "--m", "2", "--dim", "3", "--lambda", "-1.5"]));
    assert_eq!(v["C"].as_f64(), Some(6.0));
    assert!(v["M"].is_null());

    let out = lab(&["bounds", "--m", "2", "--dim", "3", "--lambda", "-2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_examples() {
    let v = json(&lab(&[
        "solve", "--m", "2", "--dim", "2", "--lambda", "1", "--method", "power",
    ]));
    assert!((v["mu"].as_f64().unwrap() - (4.0 + 13f64.sqrt()) / 6.0).abs() <= 1e-12);
    assert_eq!(v["bound_C"].as_f64(), Some(2.0));
    assert!(v["slack"].as_f64().unwrap() > 0.0);
    assert_eq!(v["within_bound"], true);

    let v = json(&lab(&["solve", "--m", "3", "--dim", "1", "--lambda", "2"]));
    assert_eq!(v["mu"].as_f64(), Some(0.5));

    let power = json(&lab(&["solve", "--m", "3", "--dim", "2", "--lambda", "1"]))["mu"]
        .as_f64()
        .unwrap();
    let grid = json(&lab(&[
        "solve", "--m", "3", "--dim", "2", "--lambda", "1", "--method", "grid",
    ]));
    assert!((grid["mu"].as_f64().unwrap() - power).abs() <= 1e-4);
    assert!(!grid["pairs"].as_array().unwrap().is_empty());
}

#[test]
fn solve_negative_shift_lists_pairs() {
    let v = json(&lab(&[
        "solve", "--m", "2", "--dim", "3", "--lambda", "-1.5", "--seed", "3",
    ]));
    assert_eq!(v["method"], "newton");
    assert!(v["bound_M"].is_null());
    for p in v["pairs"].as_array().unwrap() {
        assert!(p["mu"].as_f64().unwrap().abs() <= 6.0);
    }
}

#[test]
fn sweep_flags_and_summary() {
    let out = lab(&[
        "sweep",
        "--m",
        "2",
        "--dims",
        "2:50",
        "--lambdas",
        "1",
        "--format",
        "json",
    ]);
    let v = json(&out);
    let rows = v["records"].as_array().unwrap();
    assert_eq!(rows.len(), 49);
    assert!(rows.iter().all(|r| r["slack"].as_f64().unwrap() > 0.0));
    assert_eq!(v["summary"]["violations"], 0);
    assert_eq!(v["summary"]["mu_monotone_in_d"], true);
}

#[test]
fn sweep_lambda_grid_has_fifty_rows() {
    let out = lab(&["sweep", "--m", "3", "--dims", "20", "--lambdas", "0.1:5.0:0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 51);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("violations 0"), "{summary}");
}

#[test]
fn sweep_usage_errors() {
    assert_eq!(
        lab(&["sweep", "--m", "2", "--dims", "5:2", "--lambdas", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(lab(&["sweep", "--m", "2", "--lambdas", "1"]).status.code(), Some(1));
    assert_eq!(lab(&["sweep", "--bogus"]).status.code(), Some(1));
}

#[test]
fn sweep_from_config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"m": [2, 3], "dims": {"from": 2, "to": 32, "spacing": "log"},
            "lambdas": [-1.5, -1.0, 0.5, 1.0], "solver": {"tol": 1e-12, "max_iter": 10000, "seed": 1, "damping": 0.0}}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let csv_out = lab_in(dir.path(), &["sweep", "--config", cfg, "--out", "s.csv"]);
    assert!(csv_out.status.success(), "{}", String::from_utf8_lossy(&csv_out.stderr));
    let json_out = lab_in(
        dir.path(),
        &["sweep", "--config", cfg, "--out", "s.json", "--format", "json"],
    );
    assert!(json_out.status.success());

    let csv_text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(!csv_text.contains('\r'));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    let records = v["records"].as_array().unwrap();
    // lambda = -1 is skipped: 2 orders x 5 dims x 3 shifts.
    assert_eq!(records.len(), 30);

    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for (row, rec) in reader.records().zip(records) {
        let row = row.unwrap();
        for (csv_name, json_name) in [
            ("mu", "mu"),
            ("bound_C", "bound_c"),
            ("slack", "slack"),
            ("residual", "residual"),
        ] {
            let a: f64 = row[col(csv_name)].parse().unwrap();
            assert_eq!(a.to_bits(), rec[json_name].as_f64().unwrap().to_bits());
        }
        // Offline re-validation.
        if &row[col("converged")] == "true" {
            let mu: f64 = row[col("mu")].parse().unwrap();
            let res: f64 = row[col("residual")].parse().unwrap();
            let c: f64 = row[col("bound_C")].parse().unwrap();
            assert!(res <= 1e-12 * mu.abs().max(1.0));
            assert!(mu.abs() <= c);
        }
        assert_eq!(&row[col("wall_seconds")], "");
    }
}

#[test]
fn truncation_study_outputs_gap_table() {
    let out = lab(&["truncation-study", "--m", "2", "--lambda", "1", "--dims", "2:512"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let d: f64 = r[0].parse().unwrap();
        let mu: f64 = r[1].parse().unwrap();
        assert!(mu < PI && mu < d * (PI / d).sin());
    }

    let v = json(&lab(&[
        "truncation-study",
        "--m",
        "3",
        "--lambda",
        "0.25",
        "--dims",
        "2,16,64",
        "--format",
        "json",
    ]));
    for r in v["records"].as_array().unwrap() {
        assert!(r["mu"].as_f64().unwrap() <= PI * 2f64.sqrt());
    }
    assert_eq!(lab(&["truncation-study", "--lambda", "-0.5"]).status.code(), Some(1));
}

#[test]
fn inequality_check_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab_in(dir.path(), &["check-inequalities", "--trials", "100", "--dims", "2:16"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("inequality-witness.json").exists());

    let out = lab_in(
        dir.path(),
        &[
            "check-inequalities",
            "--trials",
            "20",
            "--dims",
            "2:8",
            "--corrupt-factor",
            "0.1",
            "--witness",
            "w.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let w: Value = serde_json::from_slice(&std::fs::read(dir.path().join("w.json")).unwrap()).unwrap();
    let first = &w["witnesses"][0];
    assert!(first["max_ratio"].as_f64().unwrap() > 1.0);
    assert!(!first["witness"].as_array().unwrap().is_empty());

    assert_eq!(lab(&["check-inequalities", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn bench_table() {
    let out = lab(&["bench", "--m", "4", "--dims", "8,200", "--trials", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("m,d,method,mean_seconds\n"));
    assert!(text.contains("4,200,naive,skipped"));
    assert_eq!(lab(&["bench", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
    assert_eq!(lab(&["--version"]).status.code(), Some(0));
    assert_eq!(lab(&[]).status.code(), Some(1));
}
