//! Exit codes, report streams, CSV output, and error reporting of every
//! subcommand, driven through the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_varjet"));
    c.env_remove("VARJET_SEED");
    c
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../top2d.model")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_reports(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("stdout lines are JSON reports"))
        .collect()
}

#[test]
fn check_model_accepts_the_bundled_fixture() {
    let model = fixture();
    let out = run(&["check-model", "--model", model.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = stdout_reports(&out);
    assert!(!reports.is_empty());
    for r in &reports {
        assert_eq!(r["pass"].as_bool(), Some(true), "{r}");
        assert_eq!(r["seed"].as_u64(), Some(3), "{r}");
    }
}

#[test]
fn passing_sweeps_over_the_fixture_exit_zero() {
    let model = fixture();
    let m = model.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["helmholtz", "--model", m, "--name", "E10", "--samples", "25"],
        vec!["helmholtz", "--model", m, "--name", "E10", "--samples", "25", "--split"],
        vec!["el", "--model", m, "--name", "L1", "--against", "E10", "--samples", "25"],
        vec!["el", "--model", m, "--name", "L2", "--against", "E10", "--samples", "25"],
        vec!["zermelo", "--model", m, "--name", "LH0", "--samples", "25"],
        vec!["lift", "--model", m, "--name", "E10", "--against", "HOM", "--samples", "25"],
        vec!["lift", "--model", m, "--name", "L1", "--against", "LH1", "--samples", "25"],
        vec!["project", "--samples", "25"],
        vec!["shape", "--model", m, "--name", "E10", "--order", "3", "--samples", "25"],
        vec!["symmetry", "--model", m, "--name", "E10", "--samples", "10"],
        vec!["nogo", "--samples", "25", "--trials", "200"],
    ];
    for args in cases {
        let out = run(&args);
        let stderr = String::from_utf8(out.stderr.clone()).unwrap();
        assert_eq!(out.status.code(), Some(0), "{args:?}\nstderr: {stderr}");
        for r in stdout_reports(&out) {
            assert_eq!(r["pass"].as_bool(), Some(true), "{args:?}: {r}");
        }
    }
}

#[test]
fn friction_term_fails_helmholtz_with_residual_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("friction.model");
    std::fs::write(
        &path,
        "[model]\nchart = parametric\ndim = 1\norder = 2\nsignature = +-\n\n[form FR]\nE1 = v1' + v1\n",
    )
    .unwrap();
    let out = run(&["helmholtz", "--model", path.to_str().unwrap(), "--name", "FR"]);
    assert_eq!(out.status.code(), Some(1), "a failed check exits 1");
    let reports = stdout_reports(&out);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["pass"].as_bool(), Some(false));
    let residual = reports[0]["max_abs_residual"].as_f64().unwrap();
    assert_eq!(residual, 2.0, "the antisymmetric defect of v1' + v1 is exactly 2");
}

#[test]
fn unknown_entry_names_are_usage_errors() {
    let model = fixture();
    let out = run(&["helmholtz", "--model", model.to_str().unwrap(), "--name", "NOPE"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("NOPE"), "{stderr}");
    assert!(stderr.contains("E10"), "error lists the available entries: {stderr}");
}

#[test]
fn wrong_entry_kind_is_reported() {
    let model = fixture();
    // E10 is a form, not a Lagrangian.
    let out = run(&["zermelo", "--model", model.to_str().unwrap(), "--name", "E10"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("not a"), "{stderr}");
}

#[test]
fn malformed_model_files_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.model");
    std::fs::write(
        &path,
        "[model]\nchart = parametric\ndim = 1\norder = 1\nsignature = +-\n\n[form F]\nE1 = v1'\n",
    )
    .unwrap();
    // v1' is a level-1 coordinate, but the chart stops at order 1.
    let out = run(&["check-model", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 8"), "{stderr}");
}

#[test]
fn simulate_writes_csv_and_a_summary_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let out = run(&[
        "top-simulate",
        "--chart",
        "parametric",
        "--steps",
        "100",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x1,x2,v1,v2,vprime1,vprime2,p0,p1,p2,q,p_drift"
    );
    assert_eq!(csv.lines().count(), 102, "header plus initial sample plus 100 steps");
    // with --out taking the CSV, the summary report owns stdout
    let reports = stdout_reports(&out);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["check"].as_str(), Some("top-simulate:parametric"));
    assert_eq!(reports[0]["pass"].as_bool(), Some(true));
}

#[test]
fn simulate_streams_csv_on_stdout_by_default() {
    let out = run(&["top-simulate", "--chart", "homogeneous", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.starts_with("zeta,X0,X1,X2,u0,u1,u2,udot0,udot1,udot2,p0,p1,p2,uu_drift,p_drift"),
        "{stdout}"
    );
    assert_eq!(stdout.lines().count(), 12);
    // the summary report moves to stderr so the CSV stays clean
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("top-simulate:homogeneous"), "{stderr}");
}

#[test]
fn simulate_rejects_inadmissible_initial_data() {
    let out = run(&["top-simulate", "--chart", "parametric", "--v0", "0.99,0"]);
    assert_eq!(out.status.code(), Some(2), "usage errors exit 2");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("inadmissible initial data"), "{stderr}");

    let out = run(&["top-simulate", "--chart", "homogeneous", "--u0", "0.0001,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_validates_vector_lengths() {
    let out = run(&["top-simulate", "--chart", "parametric", "--v0", "0.1,0.2,0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("v0"), "{stderr}");
}

#[test]
fn report_lines_can_be_teed_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let tee = dir.path().join("reports.jsonl");
    let model = fixture();
    let out = run(&[
        "check-model",
        "--model",
        model.to_str().unwrap(),
        "--out",
        tee.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let teed = std::fs::read_to_string(&tee).unwrap();
    assert_eq!(teed, String::from_utf8(out.stdout).unwrap(), "tee matches stdout");
}

#[test]
fn verify_reports_can_be_teed_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let tee = dir.path().join("battery.jsonl");
    let out = run(&["top-verify", "--seed", "1", "--out", tee.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let teed = std::fs::read_to_string(&tee).unwrap();
    assert_eq!(teed.lines().count(), 12);
    assert_eq!(teed, String::from_utf8(out.stdout).unwrap());
}

#[test]
fn seed_env_variable_is_honoured() {
    let model = fixture();
    let out = bin()
        .args(["check-model", "--model", model.to_str().unwrap()])
        .env("VARJET_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for r in stdout_reports(&out) {
        assert_eq!(r["seed"].as_u64(), Some(77), "{r}");
    }
}
