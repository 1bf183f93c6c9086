use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use super::invariants::InvariantSummary;
use crate::error::{Error, Result};
use crate::estimate::{MeasurabilityVerdict, TraceEstimate};
use crate::trend::TrendStatus;

pub const CSV_HEADER: [&str; 8] =
    ["method", "model", "param", "value", "status", "oscillation", "extrapolated", "notes"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub model: String,
    pub param: String,
    pub value: Option<f64>,
    pub status: TrendStatus,
    pub oscillation: Option<f64>,
    pub extrapolated: bool,
    pub notes: String,
}

impl ReportRow {
    pub fn from_estimate(model: &str, param: String, e: &TraceEstimate) -> Self {
        let mut notes = e.notes.clone();
        if e.status != TrendStatus::Converged {
            if let Some(fit) = e.final_fit {
                notes.push(format!("final fit {}", format_sig(fit)));
            }
        }
        Self {
            method: e.method.as_str().into(),
            model: model.into(),
            param,
            value: e.value.map(round_sig),
            status: e.status,
            oscillation: e.oscillation.is_finite().then(|| round_sig(e.oscillation)),
            extrapolated: e.extrapolated,
            notes: notes.join("; "),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurabilitySummary {
    pub verdict: MeasurabilityVerdict,
    pub max_pairwise_discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurability: Option<MeasurabilitySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantSummary>,
    /// Set when the memory budget stopped the model from being built.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<String>,
}

impl RunReport {
    /// 0 all converged and passed, 2 something undetermined, 3 invariant failure.
    pub fn exit_code(&self) -> i32 {
        if self.invariants.as_ref().is_some_and(|s| !s.all_passed()) {
            3
        } else if self.truncated.is_some() || self.rows.iter().any(|r| r.status == TrendStatus::Undetermined) {
            2
        } else {
            0
        }
    }
}

/// `%.12g`-style rendering.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to the 12 digits that are printed, so both formats carry the same number.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn status_str(s: TrendStatus) -> &'static str {
    match s {
        TrendStatus::Converged => "Converged",
        TrendStatus::Oscillating => "Oscillating",
        TrendStatus::Undetermined => "Undetermined",
    }
}

pub fn emit_csv(report: &RunReport) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in &report.rows {
        w.write_record([
            r.method.as_str(),
            r.model.as_str(),
            r.param.as_str(),
            &r.value.map(format_sig).unwrap_or_default(),
            status_str(r.status),
            &r.oscillation.map(format_sig).unwrap_or_default(),
            if r.extrapolated { "true" } else { "false" },
            r.notes.as_str(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_json(report: &RunReport) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn emit_report(report: &RunReport, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => emit_csv(report),
        OutputFormat::Json => emit_json(report),
    }
}

pub fn parse_report_json(text: &str) -> Result<RunReport> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("report JSON: {e}")))
}
