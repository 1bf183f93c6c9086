use serde::{Deserialize, Serialize};

use super::source::SpectralSource;
use crate::error::{Error, Result};
use crate::numerics::gamma;
use crate::trend::{assess, TrendAssessment, TrendPolicy, TrendStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DixmierAlpha,
    ZetaResidue,
    HeatRaw,
    HeatCesaro,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DixmierAlpha => "dixmier_alpha",
            Method::ZetaResidue => "zeta_residue",
            Method::HeatRaw => "heat_raw",
            Method::HeatCesaro => "heat_cesaro",
        }
    }
}

/// One method's reading of the logarithmic divergence of the trace.
///
/// `value` is the extrapolated limit (or the last scheduled value when not
/// extrapolating) if the schedule converged, the midpoint of the band if it
/// oscillates, and absent otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub method: Method,
    pub value: Option<f64>,
    /// `(checkpoint, scheduled value)` pairs.
    pub raw_series: Vec<(f64, f64)>,
    pub extrapolated: bool,
    /// Intercept of the final extrapolation window, reported whatever the
    /// status; it is a point reading only when `status` is `Converged`.
    pub final_fit: Option<f64>,
    pub oscillation: f64,
    pub status: TrendStatus,
    /// Width of the extrapolation band together with the spread between the
    /// last two window fits.
    pub error_estimate: f64,
    pub notes: Vec<String>,
}

impl TraceEstimate {
    fn undetermined(method: Method, raw_series: Vec<(f64, f64)>, extrapolated: bool, note: String) -> Self {
        Self {
            method,
            value: None,
            raw_series,
            extrapolated,
            final_fit: None,
            oscillation: f64::NAN,
            status: TrendStatus::Undetermined,
            error_estimate: f64::NAN,
            notes: vec![note],
        }
    }

    fn from_series(
        method: Method,
        xs: &[f64],
        raw_series: Vec<(f64, f64)>,
        extrapolate: bool,
        policy: &TrendPolicy,
    ) -> Result<Self> {
        let ys: Vec<f64> = raw_series.iter().map(|p| p.1).collect();
        let trend = assess(xs, &ys, policy)?;
        let mut notes = Vec::new();
        let value = match trend.status {
            TrendStatus::Converged if extrapolate => Some(trend.limit),
            TrendStatus::Converged => ys.last().copied(),
            TrendStatus::Oscillating => {
                let (lo, hi) = if extrapolate { trend.limit_band } else { trend.raw_band };
                notes.push(format!("oscillating: band [{lo:.6}, {hi:.6}]"));
                Some(0.5 * (lo + hi))
            }
            TrendStatus::Undetermined => {
                notes.push(undetermined_reason(&trend));
                None
            }
        };
        let value = value.map(|v| {
            if v < 0.0 {
                notes.push(format!("negative fit {v:e} clamped to 0 for a nonnegative spectrum"));
                0.0
            } else {
                v
            }
        });
        let error_estimate =
            if trend.windows_used == 0 { f64::NAN } else { trend.oscillation + last_step(xs, &ys, policy)? };
        Ok(Self {
            method,
            value,
            raw_series,
            extrapolated: extrapolate,
            final_fit: (trend.windows_used > 0).then_some(trend.limit),
            oscillation: trend.oscillation,
            status: trend.status,
            error_estimate,
            notes,
        })
    }
}

fn undetermined_reason(t: &TrendAssessment) -> String {
    if t.windows_used < 3 {
        format!("only {} extrapolation windows in the last third of the schedule", t.windows_used)
    } else {
        format!("band {:.3e} between the convergence and oscillation thresholds", t.oscillation)
    }
}

/// Change of the final intercept when the fit window is widened by two points.
fn last_step(xs: &[f64], ys: &[f64], policy: &TrendPolicy) -> Result<f64> {
    let n = ys.len();
    let j = policy.window.max(2);
    if n < j + 2 {
        return Ok(0.0);
    }
    let narrow = crate::numerics::fit_line(&xs[n - j..], &ys[n - j..])?;
    let wide = crate::numerics::fit_line(&xs[n - j - 2..], &ys[n - j - 2..])?;
    Ok((narrow.intercept - wide.intercept).abs())
}

/// `alpha_k = S_k / ln(1+k)` over `ks`, fitted as `a + b / ln(1+k)`.
pub fn dixmier_estimate(
    source: &dyn SpectralSource,
    ks: &[u64],
    extrapolate: bool,
    policy: &TrendPolicy,
) -> Result<TraceEstimate> {
    let method = Method::DixmierAlpha;
    if let Some(&last) = ks.last() {
        if last > source.horizon() {
            return Ok(TraceEstimate::undetermined(
                method,
                Vec::new(),
                extrapolate,
                format!("checkpoint {last} beyond the horizon {} of {}", source.horizon(), source.label()),
            ));
        }
    }
    let sums = match source.partial_sums(ks) {
        Ok(s) => s,
        Err(Error::CheckpointBeyondData { k, length }) => {
            return Ok(TraceEstimate::undetermined(
                method,
                Vec::new(),
                extrapolate,
                format!("checkpoint {k} beyond the data length {length}"),
            ))
        }
        Err(e) => return Err(e),
    };
    let raw: Vec<(f64, f64)> = ks.iter().zip(sums).map(|(&k, s)| (k as f64, s / (k as f64).ln_1p())).collect();
    let xs: Vec<f64> = ks.iter().map(|&k| 1.0 / (k as f64).ln_1p()).collect();
    TraceEstimate::from_series(method, &xs, raw, extrapolate, policy)
}

/// `(1/k) zeta(1 + 1/k)` over `ks`, extrapolated linearly in `1/k`.
pub fn zeta_residue_estimate(source: &dyn SpectralSource, ks: &[u64], policy: &TrendPolicy) -> Result<TraceEstimate> {
    crate::seq::check_checkpoints(ks)?;
    let method = Method::ZetaResidue;
    let mut raw = Vec::with_capacity(ks.len());
    for &k in ks {
        let s = 1.0 + 1.0 / k as f64;
        match source.zeta(s) {
            Ok(z) => raw.push((k as f64, z.value / k as f64)),
            Err(e @ Error::HeadDomination { .. }) => {
                return Ok(TraceEstimate::undetermined(method, raw, true, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    let xs: Vec<f64> = ks.iter().map(|&k| 1.0 / k as f64).collect();
    TraceEstimate::from_series(method, &xs, raw, true, policy)
}

/// `g(t) = (1/t) sum_n exp(-(t mu_n)^(-alpha))`.
pub fn heat_trace(source: &dyn SpectralSource, t: f64, alpha: f64) -> Result<f64> {
    Ok(source.heat_sum(t, alpha)? / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    Raw,
    Cesaro,
}

/// Geometric ratio of the grid on which the Cesaro mean is integrated.
pub const CESARO_GRID_RATIO: f64 = 1.1;

/// Heat functional normalized by `Gamma(1/alpha + 1)`.
///
/// Raw mode extrapolates `g(t)` linearly in `1/t`. Cesaro mode evaluates
/// `(1/ln t) int_1^t g(s) ds/s` by trapezoids in `ln s` on a geometric grid,
/// extrapolated linearly in `1/ln t`; the grid is checked against one of
/// twice the spacing.
pub fn heat_estimate(
    source: &dyn SpectralSource,
    ts: &[f64],
    alpha: f64,
    smoothing: Smoothing,
    policy: &TrendPolicy,
) -> Result<TraceEstimate> {
    if ts.is_empty() || ts.windows(2).any(|w| !(w[0] < w[1])) || !(ts[0] > 0.0) {
        return Err(Error::InvalidArgument("t schedule must be positive and strictly increasing".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let norm = gamma(1.0 / alpha + 1.0);
    match smoothing {
        Smoothing::Raw => {
            let mut raw = Vec::with_capacity(ts.len());
            for &t in ts {
                match heat_trace(source, t, alpha) {
                    Ok(g) => raw.push((t, g / norm)),
                    Err(e @ Error::HeadDomination { .. }) => {
                        return Ok(TraceEstimate::undetermined(Method::HeatRaw, raw, true, e.to_string()));
                    }
                    Err(e) => return Err(e),
                }
            }
            let xs: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
            TraceEstimate::from_series(Method::HeatRaw, &xs, raw, true, policy)
        }
        Smoothing::Cesaro => {
            let method = Method::HeatCesaro;
            if !(ts[0] > 1.0) {
                return Err(Error::InvalidArgument("Cesaro schedule needs t > 1".into()));
            }
            let means = cesaro_means(source, ts, alpha, CESARO_GRID_RATIO)
                .and_then(|f| Ok((f, cesaro_means(source, ts, alpha, CESARO_GRID_RATIO * CESARO_GRID_RATIO)?)));
            let (fine, coarse) = match means {
                Ok(m) => m,
                Err(e @ Error::HeadDomination { .. }) => {
                    return Ok(TraceEstimate::undetermined(method, Vec::new(), true, e.to_string()));
                }
                Err(e) => return Err(e),
            };
            let raw: Vec<(f64, f64)> = ts.iter().zip(&fine).map(|(&t, &v)| (t, v / norm)).collect();
            let resolution = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs() / norm).fold(0.0, f64::max);
            if resolution > policy.eps_conv {
                return Ok(TraceEstimate::undetermined(
                    method,
                    raw,
                    true,
                    format!("quadrature resolution {resolution:.3e} exceeds tolerance {:.1e}", policy.eps_conv),
                ));
            }
            let xs: Vec<f64> = ts.iter().map(|t| 1.0 / t.ln()).collect();
            let mut est = TraceEstimate::from_series(method, &xs, raw, true, policy)?;
            est.error_estimate += resolution;
            Ok(est)
        }
    }
}

/// `(1/ln t) int_1^t g(s) ds/s` at every `t` in `ts`, with `g` sampled on
/// `ratio^j` merged with the schedule.
fn cesaro_means(source: &dyn SpectralSource, ts: &[f64], alpha: f64, ratio: f64) -> Result<Vec<f64>> {
    let t_max = *ts.last().expect("nonempty schedule");
    let mut grid = vec![1.0];
    let mut s = ratio;
    while s < t_max {
        grid.push(s);
        s *= ratio;
    }
    grid.extend_from_slice(ts);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let gs = grid.iter().map(|&s| heat_trace(source, s, alpha)).collect::<Result<Vec<f64>>>()?;
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = crate::numerics::CompensatedSum::new();
    let mut next = 0;
    for i in 1..grid.len() {
        acc.add(0.5 * (gs[i - 1] + gs[i]) * (grid[i] / grid[i - 1]).ln());
        if next < ts.len() && grid[i] == ts[next] {
            out.push(acc.value() / grid[i].ln());
            next += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurabilityVerdict {
    Measurable,
    NotMeasurable,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurabilityReport {
    pub estimates: Vec<TraceEstimate>,
    pub max_pairwise_discrepancy: f64,
    pub verdict: MeasurabilityVerdict,
}

/// Discrepancies are compared against `tolerance * max(1, |value|)`.
pub fn measurability_report(
    estimates: Vec<TraceEstimate>,
    tolerance: f64,
    policy: &TrendPolicy,
) -> Result<MeasurabilityReport> {
    if estimates.len() < 2 {
        return Err(Error::InvalidArgument("a measurability report needs at least two methods".into()));
    }
    let values: Vec<f64> = estimates.iter().filter_map(|e| e.value).collect();
    let mut max_pairwise_discrepancy = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            max_pairwise_discrepancy = max_pairwise_discrepancy.max((a - b).abs());
        }
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let all_converged = estimates.iter().all(|e| e.status == TrendStatus::Converged);
    let oscillating = estimates.iter().any(|e| {
        e.status == TrendStatus::Oscillating
            && e.oscillation > policy.eps_osc * e.value.map_or(1.0, |v| v.abs().max(1.0))
    });
    let verdict = if all_converged && max_pairwise_discrepancy <= tolerance * scale {
        MeasurabilityVerdict::Measurable
    } else if oscillating {
        MeasurabilityVerdict::NotMeasurable
    } else {
        MeasurabilityVerdict::Undetermined
    };
    Ok(MeasurabilityReport { estimates, max_pairwise_discrepancy, verdict })
}

/// Default schedules.
pub fn dyadic_schedule(horizon: u64) -> Vec<u64> {
    crate::seq::dyadic_checkpoints(horizon).into_iter().filter(|&k| k >= 2).collect()
}

/// Quarter-octave checkpoints `2^(1 + j/4)` up to `limit`, rounded to odd
/// integers so that paired eigenvalues are never split.
pub fn odd_quarter_octave_schedule(limit: u64) -> Vec<u64> {
    let mut ks: Vec<u64> = (0..)
        .map(|j| 2f64.powf(1.0 + j as f64 / 4.0))
        .take_while(|&x| x <= limit as f64)
        .map(|x| (x.round() as u64) | 1)
        .filter(|&k| k <= limit)
        .collect();
    ks.dedup();
    ks
}

/// `k = step, 2 step, ..., k_max`.
pub fn zeta_schedule(k_max: u64, points: u64) -> Vec<u64> {
    let step = (k_max / points).max(1);
    (1..=k_max / step).map(|j| j * step).collect()
}

/// `per_decade` geometrically spaced times from `t_min` to `t_max`.
pub fn geometric_times(t_min: f64, t_max: f64, per_decade: u32) -> Vec<f64> {
    let decades = (t_max / t_min).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as u32;
    (0..=n).map(|j| t_min * (t_max / t_min).powf(j as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::source::AnalyticSequence;
    use crate::seq::SingularSequence;

    fn policy() -> TrendPolicy {
        TrendPolicy::default()
    }

    #[test]
    fn harmonic_three_ways() {
        let h = AnalyticSequence::Harmonic { c: 1.0 };
        let d = dixmier_estimate(&h, &dyadic_schedule(1_000_000), true, &policy()).unwrap();
        assert_eq!(d.status, TrendStatus::Converged);
        assert!((d.value.unwrap() - 1.0).abs() < 1e-3);
        let z = zeta_residue_estimate(&h, &zeta_schedule(200, 20), &policy()).unwrap();
        assert!((z.value.unwrap() - 1.0).abs() < 1e-4);
        // first scheduled value 0.1 zeta(1.1)
        assert!((z.raw_series[0].1 - 0.1 * 10.584_448_464_950_81).abs() < 1e-10);
        let r = heat_estimate(&h, &geometric_times(10.0, 1e4, 4), 1.0, Smoothing::Raw, &policy()).unwrap();
        let last = r.raw_series.last().unwrap().1;
        assert!((last - 1e-4 / (1e-4f64).exp_m1()).abs() < 1e-12);
        assert!((r.value.unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cesaro_heat_of_harmonic() {
        let h = AnalyticSequence::Harmonic { c: 1.0 };
        let ts = geometric_times(1e2, 1e8, 2);
        let c = heat_estimate(&h, &ts, 1.0, Smoothing::Cesaro, &policy()).unwrap();
        assert_eq!(c.status, TrendStatus::Converged);
        assert!((c.value.unwrap() - 1.0).abs() < 1e-2, "{:?}", c.value);
    }

    #[test]
    fn heat_normalization_for_other_alpha() {
        // mu_n = 1/n, alpha = 2: g(t) -> Gamma(3/2)
        let h = AnalyticSequence::Harmonic { c: 1.0 };
        let r = heat_estimate(&h, &geometric_times(1e2, 1e5, 3), 2.0, Smoothing::Raw, &policy()).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn zero_and_finite_sequences() {
        let z = SingularSequence::zeros(8);
        let d = dixmier_estimate(&z, &dyadic_schedule(1 << 12), true, &policy()).unwrap();
        assert_eq!(d.status, TrendStatus::Converged);
        assert_eq!(d.value, Some(0.0));
        let f = SingularSequence::new(vec![3.0, 2.0, 1.0, 0.0]).unwrap();
        let r = zeta_residue_estimate(&f, &zeta_schedule(200, 20), &policy()).unwrap();
        assert!(r.value.unwrap().abs() < 1e-12);
        let h = heat_estimate(&z, &geometric_times(10.0, 1e4, 4), 1.0, Smoothing::Raw, &policy()).unwrap();
        assert_eq!(h.value, Some(0.0));
    }

    #[test]
    fn short_data_is_undetermined() {
        let x = SingularSequence::new((1..=100).map(|n| 1.0 / n as f64).collect()).unwrap();
        let d = dixmier_estimate(&x, &dyadic_schedule(1 << 12), true, &policy()).unwrap();
        assert_eq!(d.status, TrendStatus::Undetermined);
        assert!(d.value.is_none());
        let z = zeta_residue_estimate(&x, &zeta_schedule(200, 20), &policy()).unwrap();
        assert_eq!(z.status, TrendStatus::Undetermined);
    }

    #[test]
    fn divergent_zeta_names_s() {
        let p = AnalyticSequence::PowerLog { c: 1.0, a: 0.5, b: 0.0 };
        let e = zeta_residue_estimate(&p, &[10, 20], &policy()).unwrap_err();
        assert!(e.to_string().contains("1.1"));
    }

    #[test]
    fn measurability_verdicts() {
        let h = AnalyticSequence::Harmonic { c: 1.0 };
        let est = vec![
            dixmier_estimate(&h, &dyadic_schedule(1_000_000), true, &policy()).unwrap(),
            zeta_residue_estimate(&h, &zeta_schedule(200, 20), &policy()).unwrap(),
            heat_estimate(&h, &geometric_times(10.0, 1e4, 4), 1.0, Smoothing::Raw, &policy()).unwrap(),
        ];
        let rep = measurability_report(est, 1e-2, &policy()).unwrap();
        assert_eq!(rep.verdict, MeasurabilityVerdict::Measurable);

        let o = AnalyticSequence::Oscillator { scale: 1.0 };
        let est = vec![
            dixmier_estimate(&o, &dyadic_schedule(10_000_000), true, &policy()).unwrap(),
            zeta_residue_estimate(&o, &[50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000], &policy()).unwrap(),
        ];
        assert_eq!(est[0].status, TrendStatus::Oscillating);
        let rep = measurability_report(est, 1e-2, &policy()).unwrap();
        assert_eq!(rep.verdict, MeasurabilityVerdict::NotMeasurable);
    }
}
