//! C interface to dixlab. Objects cross the boundary as opaque handles that
//! the caller releases with the matching `_free` function; every call returns
//! a `DixlabStatus`, and `dixlab_last_error` describes the most recent failure
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dixlab::estimate::{dixmier_estimate, heat_estimate, zeta_residue_estimate, Smoothing, TraceEstimate};
use dixlab::harness::{emit_report, parse_config, run_experiment, OutputFormat, RunReport};
use dixlab::seq::{decreasing_rearrangement, SingularSequence};
use dixlab::trend::{TrendPolicy, TrendStatus};
use dixlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DixlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Budget = 4,
    Numerical = 5,
    Utf8 = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DixlabTrend {
    Converged = 0,
    Oscillating = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DixlabFormat {
    Csv = 0,
    Json = 1,
}

/// Summary of one estimate. `value` is NaN when `has_value` is false.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DixlabEstimate {
    pub value: f64,
    pub has_value: bool,
    pub status: DixlabTrend,
    pub oscillation: f64,
    pub error_estimate: f64,
    pub extrapolated: bool,
}

/// Nonincreasing singular-value sequence.
pub struct DixlabSequence(SingularSequence);

/// Result of a config-driven run.
pub struct DixlabReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: DixlabStatus, msg: &str) -> DixlabStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> DixlabStatus {
    let status = match e {
        Error::Budget { .. } => DixlabStatus::Budget,
        Error::InvalidSequence(_)
        | Error::BadCheckpoints(_)
        | Error::InvalidArgument(_)
        | Error::Domain(_)
        | Error::CheckpointBeyondData { .. }
        | Error::BeyondHorizon { .. }
        | Error::GridMismatch { .. }
        | Error::ThetaMismatch(..)
        | Error::NoExactProductTrace(_) => DixlabStatus::InvalidArgument,
        _ => DixlabStatus::Numerical,
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> DixlabStatus) -> DixlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DixlabStatus::Panic, "internal panic"),
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(data, len))
    }
}

fn summarize(e: &TraceEstimate) -> DixlabEstimate {
    DixlabEstimate {
        value: e.value.unwrap_or(f64::NAN),
        has_value: e.value.is_some(),
        status: match e.status {
            TrendStatus::Converged => DixlabTrend::Converged,
            TrendStatus::Oscillating => DixlabTrend::Oscillating,
            TrendStatus::Undetermined => DixlabTrend::Undetermined,
        },
        oscillation: e.oscillation,
        error_estimate: e.error_estimate,
        extrapolated: e.extrapolated,
    }
}

/// Message for the last failure on this thread; valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn dixlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn dixlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a sequence from `len` reals; moduli are rearranged into
/// nonincreasing order.
///
/// # Safety
/// `values` must point to `len` readable doubles (or be null with `len == 0`);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dixlab_sequence_new(
    values: *const f64,
    len: usize,
    out: *mut *mut DixlabSequence,
) -> DixlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(DixlabStatus::NullPointer, "out is null");
        }
        let Some(v) = slice(values, len) else {
            return fail(DixlabStatus::NullPointer, "values is null");
        };
        let moduli: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        match decreasing_rearrangement(&moduli) {
            Ok(x) => {
                *out = Box::into_raw(Box::new(DixlabSequence(x)));
                DixlabStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `seq` must come from `dixlab_sequence_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dixlab_sequence_free(seq: *mut DixlabSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// # Safety
/// `seq` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dixlab_sequence_len(seq: *const DixlabSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

unsafe fn estimate_with(
    seq: *const DixlabSequence,
    out: *mut DixlabEstimate,
    run: impl FnOnce(&SingularSequence) -> dixlab::Result<TraceEstimate>,
) -> DixlabStatus {
    guard(|| {
        let (Some(s), false) = (seq.as_ref(), out.is_null()) else {
            return fail(DixlabStatus::NullPointer, "sequence or out is null");
        };
        match run(&s.0) {
            Ok(e) => {
                *out = summarize(&e);
                DixlabStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Extrapolated log-average estimate over the given checkpoints.
///
/// # Safety
/// `seq` must be live, `checkpoints` must hold `n` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dixlab_dixmier_estimate(
    seq: *const DixlabSequence,
    checkpoints: *const u64,
    n: usize,
    out: *mut DixlabEstimate,
) -> DixlabStatus {
    let Some(ks) = slice(checkpoints, n) else {
        return fail(DixlabStatus::NullPointer, "checkpoints is null");
    };
    estimate_with(seq, out, |x| dixmier_estimate(x, ks, true, &TrendPolicy::default()))
}

/// Zeta-residue estimate over `k` values (s = 1 + 1/k).
///
/// # Safety
/// As for `dixlab_dixmier_estimate`.
#[no_mangle]
pub unsafe extern "C" fn dixlab_zeta_residue_estimate(
    seq: *const DixlabSequence,
    ks: *const u64,
    n: usize,
    out: *mut DixlabEstimate,
) -> DixlabStatus {
    let Some(ks) = slice(ks, n) else {
        return fail(DixlabStatus::NullPointer, "ks is null");
    };
    estimate_with(seq, out, |x| zeta_residue_estimate(x, ks, &TrendPolicy::default()))
}

/// Heat-kernel estimate over increasing times; `cesaro` selects the
/// logarithmic mean.
///
/// # Safety
/// `seq` must be live, `times` must hold `n` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dixlab_heat_estimate(
    seq: *const DixlabSequence,
    times: *const f64,
    n: usize,
    alpha: f64,
    cesaro: bool,
    out: *mut DixlabEstimate,
) -> DixlabStatus {
    let Some(ts) = slice(times, n) else {
        return fail(DixlabStatus::NullPointer, "times is null");
    };
    let smoothing = if cesaro { Smoothing::Cesaro } else { Smoothing::Raw };
    estimate_with(seq, out, |x| heat_estimate(x, ts, alpha, smoothing, &TrendPolicy::default()))
}

/// Parses a JSON experiment config and runs it.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dixlab_run_config(config_json: *const c_char, out: *mut *mut DixlabReport) -> DixlabStatus {
    guard(|| {
        if config_json.is_null() || out.is_null() {
            return fail(DixlabStatus::NullPointer, "config or out is null");
        }
        let Ok(text) = CStr::from_ptr(config_json).to_str() else {
            return fail(DixlabStatus::Utf8, "config is not UTF-8");
        };
        match parse_config(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(DixlabReport(run_experiment(&c, None))));
                DixlabStatus::Ok
            }
            Err(e) => fail(DixlabStatus::Config, &e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dixlab_report_rows(report: *const DixlabReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// Process exit code the CLI would use for this report (0, 2 or 3).
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dixlab_report_exit_code(report: *const DixlabReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.exit_code())
}

/// Renders the report; free the string with `dixlab_string_free`.
///
/// # Safety
/// `report` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dixlab_report_render(
    report: *const DixlabReport,
    format: DixlabFormat,
    out: *mut *mut c_char,
) -> DixlabStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(DixlabStatus::NullPointer, "report or out is null");
        };
        let format = match format {
            DixlabFormat::Csv => OutputFormat::Csv,
            DixlabFormat::Json => OutputFormat::Json,
        };
        match emit_report(&r.0, format).map(CString::new) {
            Ok(Ok(s)) => {
                *out = s.into_raw();
                DixlabStatus::Ok
            }
            Ok(Err(_)) => fail(DixlabStatus::Utf8, "report contains a NUL byte"),
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `report` must come from `dixlab_run_config` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dixlab_report_free(report: *mut DixlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from `dixlab_report_render` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dixlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_arguments_are_reported() {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { dixlab_sequence_new(ptr::null(), 3, &mut out) }, DixlabStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(dixlab_last_error()) }.to_str().unwrap();
        assert!(msg.contains("null"));
        assert_eq!(unsafe { dixlab_sequence_len(ptr::null()) }, 0);
    }

    #[test]
    fn empty_input_gives_empty_sequence() {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { dixlab_sequence_new(ptr::null(), 0, &mut out) }, DixlabStatus::Ok);
        assert_eq!(unsafe { dixlab_sequence_len(out) }, 0);
        unsafe { dixlab_sequence_free(out) };
    }
}
