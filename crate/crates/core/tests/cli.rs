use std::path::Path;
use std::process::{Command, Output};

use dixlab::harness::{parse_report_json, CSV_HEADER};

fn dixlab(args: &[&str], env: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dixlab")).args(args).envs(env.iter().copied()).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn harmonic_run_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "estimators": [{"method": "dixmier_alpha"}, {"method": "zeta_residue"}]}"#,
    );
    let out_path = dir.path().join("report.csv");
    let out = dixlab(&["--config", &cfg, "--out", out_path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall-clock"));
    let csv = std::fs::read_to_string(out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 3);
    assert!(!csv.contains('\r'));
}

#[test]
fn format_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "estimators": [{"method": "zeta_residue"}]}"#,
    );
    let out = dixlab(&["--config", &cfg, "--format", "json"], &[]);
    let report = parse_report_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!((report.rows[0].value.unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn config_errors_exit_four_and_name_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write(dir.path(), "bad.json", r#"{"schema_version": 1, "model": {"kind": "torus", "n": 2, "cutoff": -1}}"#);
    let out = dixlab(&["--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.cutoff"));
    let cfg = write(dir.path(), "unknown.json", r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "colour": 1}"#);
    assert_eq!(dixlab(&["--config", &cfg], &[]).status.code(), Some(4));
    assert_eq!(dixlab(&["--format", "xml"], &[]).status.code(), Some(4));
    assert_eq!(dixlab(&[], &[]).status.code(), Some(4));
}

#[test]
fn missing_config_file_is_an_io_error() {
    assert_eq!(dixlab(&["--config", "/nonexistent/dixlab.json"], &[]).status.code(), Some(1));
}

#[test]
fn oscillating_input_reports_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"schema_version": 1, "model": {"kind": "oscillator"}, "format": "json",
            "estimators": [{"method": "dixmier_alpha", "horizon": 10000000}, {"method": "zeta_residue", "k_max": 5000}]}"#,
    );
    let out = dixlab(&["--config", &cfg], &[]);
    let report = parse_report_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.measurability.unwrap().verdict, dixlab::estimate::MeasurabilityVerdict::NotMeasurable);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn budget_variable_truncates_matrix_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"schema_version": 1, "model": {"kind": "matrix", "n": 1, "half_width": 300, "f": [{"mode": [0], "re": 2}]},
            "format": "json", "estimators": [{"method": "dixmier_alpha"}]}"#,
    );
    let out = dixlab(&["--config", &cfg], &[("DIXLAB_BUDGET_MB", "1")]);
    assert_eq!(out.status.code(), Some(2));
    let report = parse_report_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.truncated.is_some());
    assert!(report.rows[0].value.is_none());
    assert_eq!(dixlab(&["--config", &cfg], &[("DIXLAB_BUDGET_MB", "lots")]).status.code(), Some(4));
}

#[test]
fn check_and_list_models() {
    let out = dixlab(&["--check", "--seed", "5", "--format", "json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = parse_report_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.invariants.unwrap().all_passed());
    let again = dixlab(&["--check", "--seed", "5", "--format", "json", "--threads", "2"], &[]);
    assert_eq!(again.stdout, dixlab(&["--check", "--seed", "5", "--format", "json"], &[]).stdout);
    let models = String::from_utf8(dixlab(&["--list-models"], &[]).stdout).unwrap();
    assert_eq!(models.lines().count(), 7);
    assert!(models.lines().any(|l| l == "nc_torus"));
}
