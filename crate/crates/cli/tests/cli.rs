use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lazymc"));
    c.env_remove("LAZYMC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn m1(dir: &Path) -> String {
    write(dir, "m1.json", "[[0,1,0],[0.5,0,0.5],[0,1,0]]")
        .display()
        .to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_reports_period_and_pseudo_gap() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&run(&["analyze", "--matrix", &m1(dir.path())]));
    assert_eq!(v["period"], 2);
    assert_eq!(v["reversible"], true);
    assert_eq!(v["spectral"]["gamma_ps"].as_f64(), Some(0.0));
}

#[test]
fn lazy_output_is_the_displayed_matrix_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["lazy", "--matrix", &m1(dir.path()), "--alpha", "0.5"]);
    let v = stdout_json(&out);
    let rows: Vec<Vec<f64>> = serde_json::from_value(v["rows"].clone()).unwrap();
    assert_eq!(
        rows,
        vec![
            vec![0.5, 0.5, 0.0],
            vec![0.25, 0.5, 0.25],
            vec![0.0, 0.5, 0.5]
        ]
    );

    // Feeding the emitted document back in reproduces it byte for byte.
    let lazy_path = write(
        dir.path(),
        "lazy.json",
        std::str::from_utf8(&out.stdout).unwrap(),
    );
    let back = run(&[
        "unlazy",
        "--matrix",
        lazy_path.to_str().unwrap(),
        "--alpha",
        "0.5",
    ]);
    let u = stdout_json(&back);
    assert_eq!(u["in_lazy_range"], true);
    let rows: Vec<Vec<f64>> = serde_json::from_value(u["matrix"]["rows"].clone()).unwrap();
    assert_eq!(
        rows,
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0]
        ]
    );

    let csv_path = dir.path().join("lazy.csv");
    let csv = run(&[
        "lazy",
        "--matrix",
        lazy_path.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--format",
        "csv",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(csv.status.success());
    let json_again = run(&[
        "lazy",
        "--matrix",
        csv_path.to_str().unwrap(),
        "--alpha",
        "0.5",
    ]);
    assert!(json_again.status.success());
}

#[test]
fn json_emission_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "odd.json", "[[0.1, 0.2, 0.7], [0.3333333333333333, 0.3333333333333333, 0.3333333333333334], [1e-17, 0.5, 0.49999999999999999]]");
    let out = run(&["lazy", "--matrix", p.to_str().unwrap(), "--alpha", "0.3"]);
    let first = String::from_utf8(out.stdout).unwrap();
    let q = write(dir.path(), "lazy.json", &first);
    let u = run(&["project", "--matrix", q.to_str().unwrap()]);
    let v = stdout_json(&u);
    let again: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["matrix"], again);
}

#[test]
fn project_vector_example() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "x.json", "[0.2, 0.9, 0.3]");
    let v = stdout_json(&run(&["project", "--vector", p.to_str().unwrap()]));
    let probs: Vec<f64> = serde_json::from_value(v["point"]["probs"].clone()).unwrap();
    assert!(
        (probs[0]).abs() < 1e-12
            && (probs[1] - 0.7).abs() < 1e-12
            && (probs[2] - 0.3).abs() < 1e-12
    );
    assert!((v["distance"].as_f64().unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["lazy", "--matrix", &m1(dir.path()), "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--alpha"));
    let out = run(&["simulate", "--matrix", &m1(dir.path()), "--m", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m"));
    let out = run(&["analyze", "--matrix", &m1(dir.path()), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1_with_structured_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "[[0.5, 0.6], [0.5, 0.5]]");
    let out = run(&["analyze", "--matrix", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "RowSumNotOne");
    assert_eq!(err["context"]["subcommand"], "analyze");
    assert!(err["message"].as_str().unwrap().contains("row 0"));

    let missing = run(&["analyze", "--matrix", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["code"], "Io");
}

#[test]
fn same_argv_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = m1(dir.path());
    let args = [
        "simulate-lazy",
        "--matrix",
        &m,
        "--alpha",
        "0.3",
        "--m",
        "500",
        "--seed",
        "42",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 500);
    assert_eq!(v["rng"], "chacha8");

    let risk = [
        "risk",
        "--estimator",
        "matrix-direct",
        "--family",
        "dirichlet-ergodic",
        "--count",
        "3",
        "--d-max",
        "4",
        "--m",
        "300",
        "--eps",
        "0.3",
        "--trials",
        "40",
        "--seed",
        "5",
    ];
    let one = bin()
        .args(risk)
        .env("LAZYMC_THREADS", "1")
        .output()
        .unwrap();
    let four = bin().args(risk).args(["--threads", "4"]).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn zero_threads_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--matrix", &m1(dir.path()), "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn learners_and_tester() {
    let dir = tempfile::tempdir().unwrap();
    let m = m1(dir.path());
    let v = stdout_json(&run(&[
        "learn", "--matrix", &m, "--m", "20000", "--alpha", "0.5", "--seed", "1",
    ]));
    assert!(v["error_inf"].as_f64().unwrap() < 0.1);
    assert!(v["report"]["m_act"].as_u64().unwrap() > 9000);

    let path = write(dir.path(), "path.json", "[0, 1, 0, 1, 0]");
    let v = stdout_json(&run(&[
        "learn",
        "--path",
        path.to_str().unwrap(),
        "--states",
        "2",
    ]));
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(v["report"]["estimate"]["rows"].clone()).unwrap();
    assert_eq!(rows, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

    let v = stdout_json(&run(&[
        "estimate-pistar",
        "--matrix",
        &m,
        "--m",
        "50000",
        "--alpha",
        "0.5",
        "--seed",
        "2",
    ]));
    assert!(v["relative_error"].as_f64().unwrap() < 0.1);

    let v = stdout_json(&run(&[
        "test-identity",
        "--matrix",
        &m,
        "--reference",
        &m,
        "--eps",
        "0.2",
        "--m",
        "50000",
        "--alpha",
        "0.5",
    ]));
    assert_eq!(v["decision"], 0);
}

#[test]
fn complexity_and_scan_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = m1(dir.path());
    let out = run(&[
        "complexity",
        "--estimator",
        "oracle",
        "--matrix",
        &m,
        "--grid",
        "10,100",
        "--eps",
        "0.1",
        "--delta",
        "0.1",
        "--trials",
        "5",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m,risk,worst_chain_tag\n10,0.0000000000000000e0,"));

    let bad = run(&[
        "complexity",
        "--estimator",
        "oracle",
        "--matrix",
        &m,
        "--grid",
        "100,10",
        "--eps",
        "0.1",
    ]);
    assert_eq!(bad.status.code(), Some(1));

    let cfg = write(
        dir.path(),
        "exp.json",
        r#"{"estimator": {"kind": "matrix-direct"}, "families": [{"kind": "rank-one", "count": 2}], "eps": 0.5, "m": 200, "trials": 10}"#,
    );
    let v = stdout_json(&run(&["risk", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["per_chain"].as_array().unwrap().len(), 2);

    let out = run(&["scan-conjecture", "--count", "4", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 4 * 3
    );
}

#[test]
fn claim_suite_exit_code_tracks_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify-paper",
        "--quick",
        "--seed",
        "7",
        "--output",
        report.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let claims = v["claims"].as_array().unwrap();
    let failed = claims.iter().any(|c| c["status"] == "fail");
    assert_eq!(out.status.code(), Some(if failed { 3 } else { 0 }));
    let summary = String::from_utf8_lossy(&out.stderr);
    for c in claims {
        assert!(summary.contains(c["id"].as_str().unwrap()));
    }
}
