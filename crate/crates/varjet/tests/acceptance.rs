//! The full verification battery, driven through the installed binary the
//! way a user would run it.

use std::collections::BTreeSet;
use std::process::Command;

use serde_json::Value;

fn run_battery(seed: &str) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_varjet"))
        .args(["top-verify", "--seed", seed])
        .env_remove("VARJET_SEED")
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn battery_passes_and_is_deterministic() {
    let (stdout, _, code) = run_battery("1");
    let mut failed = Vec::new();
    let mut names = BTreeSet::new();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 12, "one report per criterion:\n{stdout}");
    for line in &lines {
        let v: Value = serde_json::from_str(line).expect("report lines are JSON");
        let check = v["check"].as_str().unwrap().to_string();
        assert_eq!(v["seed"].as_u64(), Some(1), "{check}");
        assert!(v["samples"].as_u64().unwrap() > 0, "{check}");
        assert!(v["max_abs_residual"].is_number(), "{check}");
        assert!(v["tolerance"].is_number(), "{check}");
        let pass = v["pass"].as_bool().unwrap();
        println!(
            "{check}: residual {} vs tol {} -> {}",
            v["max_abs_residual"], v["tolerance"],
            if pass { "pass" } else { "FAIL" }
        );
        if !pass {
            failed.push(check.clone());
        }
        names.insert(check);
    }
    assert_eq!(names.len(), 12, "criterion names are distinct");
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
    assert_eq!(code, 0);

    let (again, _, code2) = run_battery("1");
    assert_eq!(code2, 0);
    assert_eq!(stdout, again, "same seed must reproduce byte-identical reports");
}

#[test]
fn battery_covers_the_expected_checks() {
    let (stdout, _, _) = run_battery("1");
    let names: BTreeSet<String> = stdout
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["check"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    for expected in [
        "helmholtz-top",
        "euler-poisson-top",
        "zermelo-top",
        "homogeneous-lift",
        "momentum-conservation",
        "spin-form-match",
        "normal-form-top",
        "random-lagrangians",
        "equivariance",
        "profile-pdes",
        "obstruction-certificate",
        "determinism",
    ] {
        assert!(names.contains(expected), "missing report {expected}; got {names:?}");
    }
}

#[test]
fn seed_changes_the_samples_but_not_the_verdict() {
    let (a, _, code_a) = run_battery("1");
    let (b, _, code_b) = run_battery("2");
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0, "battery must pass for other seeds too:\n{b}");
    assert_ne!(a, b, "the seed is echoed, so reports differ textually");
}
