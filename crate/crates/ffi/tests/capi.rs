use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dixlab_ffi::*;

fn harmonic(n: usize) -> *mut DixlabSequence {
    let v: Vec<f64> = (1..=n).rev().map(|k| 1.0 / k as f64).collect();
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { dixlab_sequence_new(v.as_ptr(), v.len(), &mut seq) }, DixlabStatus::Ok);
    seq
}

#[test]
fn estimates_through_the_c_surface() {
    let seq = harmonic(1 << 20);
    assert_eq!(unsafe { dixlab_sequence_len(seq) }, 1 << 20);
    let ks: Vec<u64> = (1..=20).map(|j| 1u64 << j).collect();
    let mut est = DixlabEstimate {
        value: 0.0,
        has_value: false,
        status: DixlabTrend::Undetermined,
        oscillation: 0.0,
        error_estimate: 0.0,
        extrapolated: false,
    };
    assert_eq!(unsafe { dixlab_dixmier_estimate(seq, ks.as_ptr(), ks.len(), &mut est) }, DixlabStatus::Ok);
    assert!(est.has_value && est.status == DixlabTrend::Converged);
    assert!((est.value - 1.0).abs() < 1e-3);

    let zs = [10u64, 20, 50, 100];
    assert_eq!(unsafe { dixlab_zeta_residue_estimate(seq, zs.as_ptr(), zs.len(), &mut est) }, DixlabStatus::Ok);
    assert_eq!(est.status, DixlabTrend::Undetermined);
    assert!(!est.has_value && est.value.is_nan());

    let ts = [10.0, 100.0, 1000.0];
    assert_eq!(unsafe { dixlab_heat_estimate(seq, ts.as_ptr(), ts.len(), 1.0, false, &mut est) }, DixlabStatus::Ok);

    let bad = [4u64, 2];
    assert_eq!(unsafe { dixlab_dixmier_estimate(seq, bad.as_ptr(), 2, &mut est) }, DixlabStatus::InvalidArgument);
    let msg = unsafe { CStr::from_ptr(dixlab_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("increasing"), "{msg}");
    assert_eq!(
        unsafe { dixlab_dixmier_estimate(ptr::null(), ks.as_ptr(), ks.len(), &mut est) },
        DixlabStatus::NullPointer
    );
    unsafe { dixlab_sequence_free(seq) };
}

#[test]
fn config_runs_render_reports() {
    let cfg = CString::new(
        r#"{"schema_version": 1, "model": {"kind": "torus", "n": 2, "cutoff": 200},
            "estimators": [{"method": "zeta_residue"}, {"method": "heat_raw", "t_min": 100, "t_max": 1e4}]}"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { dixlab_run_config(cfg.as_ptr(), &mut report) }, DixlabStatus::Ok);
    assert_eq!(unsafe { dixlab_report_rows(report) }, 2);
    assert_eq!(unsafe { dixlab_report_exit_code(report) }, 0);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { dixlab_report_render(report, DixlabFormat::Csv, &mut text) }, DixlabStatus::Ok);
    let csv = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    assert!(csv.starts_with("method,model,param,value,status,oscillation,extrapolated,notes\n"));
    assert_eq!(csv.lines().count(), 3);
    unsafe {
        dixlab_string_free(text);
        dixlab_report_free(report);
    }

    let bad = CString::new(r#"{"schema_version": 1, "model": {"kind": "torus", "n": 2, "cutoff": -1}}"#).unwrap();
    assert_eq!(unsafe { dixlab_run_config(bad.as_ptr(), &mut report) }, DixlabStatus::Config);
    let msg = unsafe { CStr::from_ptr(dixlab_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("model.cutoff"));
}

fn target_dir() -> PathBuf {
    // tests/ binaries live in target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let lib = target_dir().join("libdixlab_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping", lib.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "dixlab.h"
int main(void) {
    double v[4] = {0.25, -1.0, 0.5, 0.0};
    DixlabSequence *seq = NULL;
    if (dixlab_sequence_new(v, 4, &seq) != DIXLAB_STATUS_OK) return 1;
    if (dixlab_sequence_len(seq) != 4) return 2;
    uint64_t ks[2] = {1, 2};
    DixlabEstimate e;
    if (dixlab_dixmier_estimate(seq, ks, 2, &e) != DIXLAB_STATUS_OK) return 3;
    dixlab_sequence_free(seq);
    if (dixlab_sequence_new(NULL, 3, &seq) != DIXLAB_STATUS_NULL_POINTER) return 4;
    printf("%s\n", dixlab_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("probe");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
