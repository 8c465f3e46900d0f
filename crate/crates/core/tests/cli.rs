use std::path::{Path, PathBuf};
use std::process::Command;

use confhyp::cli::{run, Outcome, EXIT_COMPUTATION, EXIT_PASS, EXIT_USAGE};
use confhyp::report::{parse_report, ReportValue};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn confhyp(args: &[&str]) -> Outcome {
    run(std::iter::once("confhyp").chain(args.iter().copied()))
}

fn generated(dir: &Path, dim: usize, order: usize, seed: u64) -> String {
    let path = dir.join(format!("d{dim}k{order}s{seed}.txt"));
    let p = path.to_str().unwrap();
    let (d, k, s) = (dim.to_string(), order.to_string(), seed.to_string());
    let out = confhyp(&["generate", "--dim", &d, "--order", &k, "--seed", &s, "--mode", "exact", "--out", p]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    p.to_string()
}

#[test]
fn verify_flat_fixture_has_zero_residuals() {
    let flat = fixture("flat.txt");
    let out = confhyp(&["verify", flat.to_str().unwrap(), "--trials", "2", "--no-timestamp"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let report = parse_report(&out.stdout).unwrap();
    assert!(report.passed());
    let residuals: Vec<_> = report.entries.iter().filter(|(k, _)| k.starts_with("residual.")).collect();
    assert!(!residuals.is_empty());
    for (k, v) in residuals {
        assert_eq!(v.as_f64(), Some(0.0), "{k}");
    }
}

#[test]
fn probe_finds_third_form_at_order_two() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generated(dir.path(), 4, 5, 17);
    let out = confhyp(&["probe", &scenario, "--invariant", "III", "--max-order", "4", "--trials", "2", "--no-timestamp"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let report = parse_report(&out.stdout).unwrap();
    assert_eq!(report.get("probe.III.detected_order").and_then(ReportValue::as_f64), Some(2.0));
}

#[test]
fn enumerate_prints_two_candidates() {
    let out = confhyp(&["enumerate", "--m", "3", "--no-timestamp"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let lines = out.stdout.lines().filter(|l| l.starts_with("candidate.m3[")).count();
    assert_eq!(lines, 2, "{}", out.stdout);
}

#[test]
fn enumerate_rejects_small_m() {
    let out = confhyp(&["enumerate", "--m", "2"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn fourth_form_in_five_dimensions_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generated(dir.path(), 5, 4, 1);
    let out = confhyp(&["probe", &scenario, "--invariant", "IV", "--trials", "1"]);
    assert_eq!(out.code, EXIT_COMPUTATION);
    assert!(out.stderr.contains("kind=fourth_form_excluded"), "{}", out.stderr);
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "[meta]\ndimension = four\n").unwrap();
    let out = confhyp(&["report", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.starts_with("error kind=usage"), "{}", out.stderr);

    let out = confhyp(&["report", path.to_str().unwrap(), "--bogus"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn output_is_deterministic_without_timestamp() {
    let flat = fixture("flat.txt");
    let args = ["report", flat.to_str().unwrap(), "--no-timestamp"];
    let a = confhyp(&args);
    let b = confhyp(&args);
    assert_eq!(a.code, EXIT_PASS, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains("timestamp"));
}

#[test]
fn binary_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.txt");
    let status = Command::new(env!("CARGO_BIN_EXE_confhyp"))
        .args(["report", fixture("flat.txt").to_str().unwrap(), "--mode", "float", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let report = parse_report(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let h = report.get("value.H").or_else(|| report.get("value.H[0]")).and_then(ReportValue::as_f64);
    assert_eq!(h, Some(0.0));
}
