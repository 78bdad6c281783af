use std::path::Path;
use std::process::{Command, Output};

use gutzmerlab::io::{load_spectral_data, save_spectral_data};
use gutzmerlab::spectral::{synth_bandlimited, SynthSpec};
use gutzmerlab::C64;
use serde_json::Value;

const SMALL: &[&str] = &["--A", "0.5", "--B", "2", "--grid", "32", "--kmax", "10", "--lambda-grid", "9"];

fn gutzmerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gutzmerlab")).args(args).env("GUTZMERLAB_THREADS", "2").output().expect("binary runs")
}

fn synth_small(path: &Path) {
    let mut args = vec!["synth", "-o", path.to_str().unwrap(), "--t-points", "32"];
    args.extend_from_slice(SMALL);
    let out = gutzmerlab(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn csv_rows(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone()).unwrap().lines().skip(1).map(str::to_owned).collect()
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gfn");
    let b = dir.path().join("b.gfn");
    synth_small(&a);
    synth_small(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(dir.path().join("a.spd")).unwrap(), std::fs::read(dir.path().join("b.spd")).unwrap());
}

#[test]
fn synth_rejects_band_beyond_lambda_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = gutzmerlab(&["synth", "-o", dir.path().join("x.gfn").to_str().unwrap(), "--A", "2", "--lambda-grid", "9:1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.gfn").exists());
}

#[test]
fn verify_plancherel_on_fixture_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.gfn");
    synth_small(&f);
    let out = gutzmerlab(&["verify", "plancherel", "-i", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(",true"));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let mut args = vec!["verify", "inversion", "--fixtures", "2", "-o", report.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let out = gutzmerlab(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["suite"], "inversion");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_gutzmer_passes_and_fails_on_tolerance() {
    let mut args = vec!["verify", "gutzmer"];
    args.extend_from_slice(SMALL);
    let out = gutzmerlab(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&out).len(), 6);

    args.extend_from_slice(&["--tol", "1e-300"]);
    let out = gutzmerlab(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(csv_rows(&out).iter().any(|r| r.ends_with(",false")));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gutzmerlab(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(gutzmerlab(&["verify", "plancherel", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(gutzmerlab(&["verify", "plancherel", "-i", "/nonexistent/f.gfn"]).status.code(), Some(2));
    assert_eq!(gutzmerlab(&["detect", "-i", "/nonexistent/f.gfn"]).status.code(), Some(2));
    assert_eq!(gutzmerlab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn detect_reports_band_limits() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.gfn");
    synth_small(&f);
    let out = gutzmerlab(&["detect", "-i", f.to_str().unwrap(), "--A", "0.5", "--B", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["A_hat", "B_hat", "fits", "tail_test", "verdict"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["verdict"], "band-limited");
    assert!((doc["A_hat"].as_f64().unwrap() - 0.5).abs() < 0.025);
    assert_eq!(doc["tail_test"]["passed"], true);
}

#[test]
fn detect_zero_fixture_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SynthSpec::new(0.5, 2.0, 3);
    spec.grid_points = 32;
    spec.t_points = 32;
    spec.kmax = 10;
    spec.lambda_count = 9;
    let (_, sd) = synth_bandlimited(&spec).unwrap();
    let sd = sd.scaled(C64::new(0.0, 0.0));
    let spd = dir.path().join("zero.spd");
    save_spectral_data(&sd, &spd).unwrap();
    let out = gutzmerlab(&["detect", "-i", spd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "inconclusive");
}

#[test]
fn euclid_writes_csv_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let out = gutzmerlab(&["euclid", "--A", "1", "--y", "0.5,1", "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "|y|,lhs,rhs,relerr");
    assert_eq!(lines.len(), 3);
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.fit.json")).unwrap()).unwrap();
    assert!((fit["a_hat"].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_gutzmerlab")).args(["verify", "gauss-bessel"]).env("GUTZMERLAB_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn different_seeds_share_the_band() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for seed in ["1", "2"] {
        let path = dir.path().join(format!("s{seed}.gfn"));
        let mut args = vec!["synth", "-o", path.to_str().unwrap(), "--t-points", "32", "--seed", seed];
        args.extend_from_slice(SMALL);
        assert!(gutzmerlab(&args).status.success());
        reports.push(load_spectral_data(dir.path().join(format!("s{seed}.spd"))).unwrap());
    }
    assert_ne!(reports[0].total_energy(), reports[1].total_energy());
    for sd in &reports {
        for c in sd.cells().iter().filter(|c| c.energy > 0.0) {
            assert!(c.lambda.abs() <= 0.5 + 1e-12 && c.fan <= 2.0 + 1e-12);
        }
    }
}
