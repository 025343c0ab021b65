use std::path::Path;
use std::process::{Command, Output};

use qtm_cli::commands::{oracle_check, oracle_check_with, OracleCheckArgs};
use qtm_cli::output::sha256_hex;
use qtm_cli::AlphaSpec;
use qtm_core::state::pauli;
use qtm_core::{BlochVector, DensityMatrix2};
use serde_json::Value;

fn qtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = qtm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn distinct_points(rows: &[Vec<f64>], tol: f64) -> usize {
    let pts: Vec<BlochVector> = rows
        .iter()
        .map(|r| BlochVector::new(r[1], r[2], r[3]))
        .collect();
    qtm_core::pattern::distinct_count(&pts, tol)
}

#[test]
fn pattern_single_step() {
    let csv = stdout(&["pattern", "--alpha1", "0.3", "--steps", "1"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,s1,s2,s3,purity"));
    let r = rows(&csv);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], 1.0);
    assert_eq!(r[0][1], 0.0);
    assert!(!csv.contains('\r'));
}

#[test]
fn exact_pattern_has_fourteen_points() {
    let r = rows(&stdout(&["pattern", "--alpha1", "2/5", "--steps", "10000"]));
    assert_eq!(r.len(), 10000);
    assert_eq!(distinct_points(&r, 1e-9), 14);
}

#[test]
fn truncated_pi_pattern_fills_after_the_orbit_is_left() {
    let r = rows(&stdout(&[
        "pattern",
        "--alpha1",
        "1.2566370616",
        "--steps",
        "10000",
    ]));
    // only the first 40 steps can coincide at this resolution
    let late: Vec<Vec<f64>> = r[40..].to_vec();
    assert_eq!(distinct_points(&late, 1e-9), late.len());
}

#[test]
fn outputs_are_reproducible_from_their_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "distance",
        "--alpha1",
        "0.7",
        "--steps",
        "300",
        "--subsystem",
        "tape",
        "--record-every",
        "3",
    ];
    for p in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", p.to_str().unwrap()]);
        assert!(qtm(&full).status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let manifest: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "distance");
    assert_eq!(manifest["sha256"], sha256_hex(&bytes));
    assert_eq!(manifest["config"]["subsystem"], "tape");

    let rerun = manifest["rerun"].as_str().unwrap();
    let words: Vec<&str> = rerun.split_whitespace().skip(1).collect();
    let out = qtm(&words);
    assert!(out.status.success());
    assert_eq!(out.stdout, bytes);
}

#[test]
fn fixed_schedule_gives_constant_network_distance() {
    let r = rows(&stdout(&[
        "distance",
        "--mode",
        "fixed",
        "--subsystem",
        "network",
        "--steps",
        "500",
    ]));
    let d0 = r[0][1];
    assert!(d0 > 0.0);
    assert!(r.iter().all(|x| (x[1] - d0).abs() < 1e-10));
}

#[test]
fn zero_delta_gives_zero_distance() {
    let r = rows(&stdout(&["distance", "--delta", "0", "--steps", "100"]));
    assert!(r.iter().all(|x| x[1] == 0.0));
}

#[test]
fn fibonacci_distance_saturates_below_two() {
    let r = rows(&stdout(&["distance", "--steps", "2000"]));
    let max = r.iter().map(|x| x[1]).fold(0.0, f64::max);
    assert!(max > 1.5 && max <= 2.0 + 1e-10, "{max}");
    assert!(r[20][1] > 100.0 * r[2][1]);
}

#[test]
fn stability_report_shows_limits_and_convergence() {
    let v: Value = serde_json::from_str(&stdout(&[
        "stability",
        "--alpha1",
        "2/5",
        "--m",
        "20",
        "--delta",
        "1e-4,1e-5,1e-6",
    ]))
    .unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["m11_limit"], 4181.0);
    assert_eq!(v["m11_error_monotone"], true);
    assert_eq!(v["tape_error_monotone"], true);
    let last = &entries[2];
    assert!(last["m11_rel_error"].as_f64().unwrap() < 1e-3);
    let m11 = last["m11"].as_f64().unwrap();
    let closed = last["m11_closed_form"].as_f64().unwrap();
    assert!((m11 - closed).abs() < 1e-8);
}

#[test]
fn stability_trivial_orbit() {
    let v: Value = serde_json::from_str(&stdout(&[
        "stability",
        "--alpha1",
        "0/1",
        "--m",
        "2",
        "--delta",
        "1e-6",
    ]))
    .unwrap();
    assert_eq!(v["entries"][0]["m11_limit"], 1.0);
    assert!(v["tape_unavailable"].as_str().unwrap().contains("sin"));
}

#[test]
fn stability_off_orbit_is_a_structured_error() {
    let out = qtm(&["stability", "--alpha1", "2/5", "--m", "7"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "not_periodic");
    assert_eq!(v["error"]["smallest_period"], 40);

    let out = qtm(&["stability", "--alpha1", "1.2566370614359172"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "not_exact");
}

#[test]
fn oracle_check_passes() {
    for args in [
        ["--alpha1", "2/5", "--delta", "0"],
        ["--alpha1", "0.3", "--delta", "0.001"],
    ] {
        let mut full = vec!["oracle-check", "--steps", "2000"];
        full.extend(args);
        let out = qtm(&full);
        assert_eq!(out.status.code(), Some(0));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["pass"], true);
        assert!(v["max_deviation"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn oracle_check_catches_a_flipped_pauli_sign() {
    let args = OracleCheckArgs {
        alpha1: "2/5".parse::<AlphaSpec>().unwrap(),
        delta: 0.0,
        steps: 100,
        tolerance: 1e-9,
    };
    assert!(oracle_check(&args).unwrap().pass);
    let flipped = pauli::SIGMA2.map(|row| row.map(|z| -z));
    let corrupted = |rho: &DensityMatrix2| {
        Ok(BlochVector::new(
            rho.expectation(&pauli::SIGMA1).re,
            rho.expectation(&flipped).re,
            rho.expectation(&pauli::SIGMA3).re,
        ))
    };
    let report = oracle_check_with(&args, corrupted).unwrap();
    assert!(!report.pass);
    assert_eq!(report.first_failing_step, Some(1));
}

#[test]
fn failing_check_exits_one() {
    let out = qtm(&[
        "oracle-check",
        "--alpha1",
        "0.3",
        "--steps",
        "10",
        "--tolerance",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["pattern", "--alpha1", "two"],
        vec!["pattern", "--steps", "0"],
        vec!["distance", "--delta", "-1"],
        vec!["distance", "--record-every", "0"],
        vec!["oracle-check", "--steps", "1000001"],
        vec!["lyapunov", "--from-cycle", "50", "--to-cycle", "60"],
        vec!["bogus"],
    ] {
        assert_eq!(qtm(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    assert!(!Path::new(&missing).exists());
    let out = qtm(&[
        "pattern",
        "--steps",
        "2",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lyapunov_report() {
    let v: Value = serde_json::from_str(&stdout(&["lyapunov"])).unwrap();
    assert!(v["rel_error"].as_f64().unwrap() < 0.05);
    assert!(v["max_d2_in_window"].as_f64().unwrap() < 0.5);
}
