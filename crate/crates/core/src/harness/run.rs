use std::path::Path;

use rayon::prelude::*;

use super::config::{EstimatorSpec, ExperimentConfig, HeatSpec, ModelSpec, SCHEMA_VERSION};
use super::invariants::run_invariant_suite;
use super::report::{format_sig, MeasurabilitySummary, ReportRow, RunReport};
use crate::error::{Error, Result};
use crate::estimate::{
    dixmier_estimate, dyadic_schedule, geometric_times, heat_estimate, measurability_report,
    odd_quarter_octave_schedule, zeta_residue_estimate, zeta_schedule, AnalyticSequence, Smoothing, SpectralSource,
    TraceEstimate,
};
use crate::models::{multiplication_matrix, nc_torus_spectrum, singular_values, LatticeModel};
use crate::seq::{decreasing_rearrangement, PowerLogTail, SingularSequence};
use crate::trend::{TrendPolicy, TrendStatus};

/// Default Dixmier horizon for models given by a formula.
const ANALYTIC_HORIZON: u64 = 1 << 20;

enum BuiltModel {
    Analytic(AnalyticSequence),
    Lattice(LatticeModel),
    Sequence { x: SingularSequence, checkpoints: Vec<u64> },
}

impl BuiltModel {
    fn source(&self) -> &dyn SpectralSource {
        match self {
            BuiltModel::Analytic(a) => a,
            BuiltModel::Lattice(m) => m,
            BuiltModel::Sequence { x, .. } => x,
        }
    }

    fn default_checkpoints(&self) -> Vec<u64> {
        match self {
            BuiltModel::Analytic(_) => dyadic_schedule(ANALYTIC_HORIZON),
            BuiltModel::Lattice(m) => dyadic_schedule(m.count()),
            BuiltModel::Sequence { checkpoints, .. } => checkpoints.clone(),
        }
    }
}

pub fn model_label(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Harmonic { c } => format!("harmonic(c={})", format_sig(*c)),
        ModelSpec::Oscillator { scale } => format!("oscillator(scale={})", format_sig(*scale)),
        ModelSpec::PowerLog { c, a, b } => {
            format!("power_log(c={}, a={}, b={})", format_sig(*c), format_sig(*a), format_sig(*b))
        }
        ModelSpec::Torus { n, cutoff } => format!("torus(n={n}, cutoff={})", format_sig(*cutoff)),
        ModelSpec::NcTorus { theta, cutoff } => {
            format!("nc_torus(theta={}, cutoff={})", format_sig(*theta), format_sig(*cutoff))
        }
        ModelSpec::Matrix { n, half_width, .. } => format!("matrix(n={n}, M={half_width})"),
        ModelSpec::SequenceFile { path, .. } => {
            format!("sequence_file({})", path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
        }
    }
}

/// Reads whitespace- or comma-separated reals; `#` starts a comment.
pub fn read_sequence_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| {
                Error::InvalidSequence(format!("{}:{}: {tok:?} is not a number", path.display(), line_no + 1))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

fn build_model(spec: &ModelSpec, budget_mb: u64) -> Result<BuiltModel> {
    if let Some(a) = spec.analytic() {
        a.validate()?;
        return Ok(BuiltModel::Analytic(a));
    }
    match spec {
        ModelSpec::Torus { n, cutoff } => Ok(BuiltModel::Lattice(LatticeModel::new(*n, *cutoff)?)),
        ModelSpec::NcTorus { cutoff, .. } => {
            let x = nc_torus_spectrum(*cutoff, budget_mb)?;
            let checkpoints = dyadic_schedule(x.len() as u64);
            Ok(BuiltModel::Sequence { x, checkpoints })
        }
        ModelSpec::Matrix { half_width, .. } => {
            let f = spec.multiplier().expect("matrix spec")?;
            let op = multiplication_matrix(&f, *half_width, budget_mb)?;
            let x = match op.real_matrix() {
                Some(m) => crate::models::singular_values_real(&m)?,
                None => singular_values(&op.matrix)?,
            };
            let checkpoints = odd_quarter_octave_schedule(op.size() as u64 / 4);
            Ok(BuiltModel::Sequence { x, checkpoints })
        }
        ModelSpec::SequenceFile { path, tail } => {
            let raw = read_sequence_file(path)?;
            let sorted = decreasing_rearrangement(&raw.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
            let x = match tail {
                Some(t) => SingularSequence::with_tail(sorted.into_values(), PowerLogTail::new(t.c, t.a, t.b)?)?,
                None => sorted,
            };
            let checkpoints = dyadic_schedule(x.len() as u64);
            Ok(BuiltModel::Sequence { x, checkpoints })
        }
        _ => unreachable!("analytic specs handled above"),
    }
}

fn heat_times(h: &HeatSpec) -> Vec<f64> {
    geometric_times(h.t_min, h.t_max, h.per_decade)
}

fn param_label(spec: &EstimatorSpec, dixmier_ks: &[u64]) -> String {
    match spec {
        EstimatorSpec::DixmierAlpha { .. } => format!("N<={}", dixmier_ks.last().copied().unwrap_or(0)),
        EstimatorSpec::ZetaResidue { k_max, checkpoints, .. } => {
            format!("k<={}", checkpoints.as_ref().and_then(|k| k.last().copied()).unwrap_or(*k_max))
        }
        EstimatorSpec::HeatRaw(h) | EstimatorSpec::HeatCesaro(h) => {
            format!("t<={}, alpha={}", format_sig(h.t_max), format_sig(h.alpha))
        }
    }
}

fn dixmier_checkpoints(spec: &EstimatorSpec, model: &BuiltModel) -> Vec<u64> {
    match spec {
        EstimatorSpec::DixmierAlpha { checkpoints: Some(ks), .. } => ks.clone(),
        EstimatorSpec::DixmierAlpha { horizon: Some(h), .. } => dyadic_schedule(*h),
        _ => model.default_checkpoints(),
    }
}

fn run_estimator(spec: &EstimatorSpec, model: &BuiltModel, ks: &[u64], policy: &TrendPolicy) -> Result<TraceEstimate> {
    let source = model.source();
    match spec {
        EstimatorSpec::DixmierAlpha { extrapolate, .. } => dixmier_estimate(source, ks, *extrapolate, policy),
        EstimatorSpec::ZetaResidue { k_max, points, checkpoints } => {
            let ks = checkpoints.clone().unwrap_or_else(|| zeta_schedule(*k_max, *points));
            zeta_residue_estimate(source, &ks, policy)
        }
        EstimatorSpec::HeatRaw(h) => heat_estimate(source, &heat_times(h), h.alpha, Smoothing::Raw, policy),
        EstimatorSpec::HeatCesaro(h) => heat_estimate(source, &heat_times(h), h.alpha, Smoothing::Cesaro, policy),
    }
}

fn method_name(spec: &EstimatorSpec) -> &'static str {
    match spec {
        EstimatorSpec::DixmierAlpha { .. } => "dixmier_alpha",
        EstimatorSpec::ZetaResidue { .. } => "zeta_residue",
        EstimatorSpec::HeatRaw(_) => "heat_raw",
        EstimatorSpec::HeatCesaro(_) => "heat_cesaro",
    }
}

fn failed_row(spec: &EstimatorSpec, model: &str, param: String, note: String) -> ReportRow {
    ReportRow {
        method: method_name(spec).into(),
        model: model.into(),
        param,
        value: None,
        status: TrendStatus::Undetermined,
        oscillation: None,
        extrapolated: false,
        notes: note,
    }
}

/// Runs the configured estimators in parallel; rows keep the config order.
/// `budget_cap_mb` lowers the config budget (the CLI passes `DIXLAB_BUDGET_MB`).
pub fn run_experiment(config: &ExperimentConfig, budget_cap_mb: Option<u64>) -> RunReport {
    let budget = budget_cap_mb.map_or(config.budget_mb, |cap| cap.min(config.budget_mb));
    let label = model_label(&config.model);
    let policy = config.tolerances.policy();
    let invariants = config.invariants.then(|| run_invariant_suite(config.seed));
    let model = match build_model(&config.model, budget) {
        Ok(m) => m,
        Err(e) => {
            let truncated = matches!(e, Error::Budget { .. });
            let note = if truncated { format!("truncated: {e}") } else { format!("model error: {e}") };
            let rows =
                config.estimators.iter().map(|s| failed_row(s, &label, param_label(s, &[]), note.clone())).collect();
            return RunReport {
                schema_version: SCHEMA_VERSION,
                rows,
                measurability: None,
                invariants,
                truncated: Some(note),
            };
        }
    };
    let results: Vec<(ReportRow, Option<TraceEstimate>)> = config
        .estimators
        .par_iter()
        .map(|spec| {
            let ks = dixmier_checkpoints(spec, &model);
            let param = param_label(spec, &ks);
            match run_estimator(spec, &model, &ks, &policy) {
                Ok(e) => (ReportRow::from_estimate(&label, param, &e), Some(e)),
                Err(e) => (failed_row(spec, &label, param, format!("error: {e}")), None),
            }
        })
        .collect();
    let (rows, estimates): (Vec<ReportRow>, Vec<Option<TraceEstimate>>) = results.into_iter().unzip();
    let estimates: Vec<TraceEstimate> = estimates.into_iter().flatten().collect();
    let measurability = (estimates.len() >= 2)
        .then(|| measurability_report(estimates, config.tolerances.measurability, &policy).ok())
        .flatten()
        .map(|r| MeasurabilitySummary {
            verdict: r.verdict,
            max_pairwise_discrepancy: super::report::round_sig(r.max_pairwise_discrepancy),
        });
    RunReport { schema_version: SCHEMA_VERSION, rows, measurability, invariants, truncated: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::MeasurabilityVerdict;
    use crate::harness::config::parse_config;
    use crate::harness::report::emit_csv;
    use std::io::Write;

    #[test]
    fn harmonic_report_agrees_on_one() {
        let c = parse_config(
            r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "estimators": [
                {"method": "dixmier_alpha", "horizon": 1000000},
                {"method": "zeta_residue"},
                {"method": "heat_raw", "t_min": 10, "t_max": 1e4}]}"#,
        )
        .unwrap();
        let r = run_experiment(&c, None);
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert_eq!(row.status, TrendStatus::Converged, "{row:?}");
            assert!((row.value.unwrap() - 1.0).abs() < 1e-3, "{row:?}");
        }
        assert_eq!(r.measurability.as_ref().unwrap().verdict, MeasurabilityVerdict::Measurable);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn torus_report_agrees_on_pi() {
        let c = parse_config(
            r#"{"schema_version": 1, "model": {"kind": "torus", "n": 2, "cutoff": 400}, "estimators": [
                {"method": "dixmier_alpha"}, {"method": "zeta_residue"},
                {"method": "heat_raw", "t_min": 1e2, "t_max": 1e4}]}"#,
        )
        .unwrap();
        let r = run_experiment(&c, None);
        for row in &r.rows {
            assert!((row.value.unwrap() - std::f64::consts::PI).abs() < 1e-2 * std::f64::consts::PI, "{row:?}");
        }
    }

    #[test]
    fn empty_estimator_list() {
        let c = parse_config(r#"{"schema_version": 1, "model": {"kind": "harmonic"}}"#).unwrap();
        let r = run_experiment(&c, None);
        assert!(r.rows.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(String::from_utf8(emit_csv(&r).unwrap()).unwrap().lines().count(), 1);
    }

    #[test]
    fn budget_cap_truncates() {
        let c = parse_config(
            r#"{"schema_version": 1, "model": {"kind": "matrix", "n": 1, "half_width": 200, "f": [{"mode": [0], "re": 2}]},
                "estimators": [{"method": "dixmier_alpha"}]}"#,
        )
        .unwrap();
        let r = run_experiment(&c, Some(1));
        assert!(r.truncated.as_deref().unwrap().starts_with("truncated"));
        assert_eq!(r.rows[0].status, TrendStatus::Undetermined);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn sequence_file_model() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# finite sequence").unwrap();
        writeln!(f, "0.25, 1.0 0.5").unwrap();
        writeln!(f, "0").unwrap();
        let text = format!(
            r#"{{"schema_version": 1, "model": {{"kind": "sequence_file", "path": {:?}}},
                "estimators": [{{"method": "zeta_residue"}}]}}"#,
            f.path()
        );
        let r = run_experiment(&parse_config(&text).unwrap(), None);
        assert!(r.rows[0].value.unwrap().abs() < 1e-4, "{:?}", r.rows[0]);
    }
}
