//! Sliding-window extrapolation of a scheduled series.
//!
//! A series `y_i` sampled at abscissae `x_i` (already transformed so the
//! leading error is linear in `x`, e.g. `x = 1/ln(1+N)`) is fitted by
//! `y = a + b x` on every window of `window` consecutive points. The
//! intercepts of the windows ending in the last third of the schedule form
//! the extrapolation band; its width is the oscillation amplitude.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::fit_line;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendStatus {
    Converged,
    Oscillating,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPolicy {
    pub window: usize,
    pub eps_conv: f64,
    pub eps_osc: f64,
}

impl Default for TrendPolicy {
    fn default() -> Self {
        Self { window: 6, eps_conv: 1e-2, eps_osc: 5e-2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendAssessment {
    pub status: TrendStatus,
    /// Intercept of the final window.
    pub limit: f64,
    /// max - min of the window intercepts over the analysis range.
    pub oscillation: f64,
    /// (min, max) of the raw series over the last third.
    pub raw_band: (f64, f64),
    /// (min, max) of the window intercepts over the analysis range.
    pub limit_band: (f64, f64),
    pub windows_used: usize,
}

/// Relative tolerances scale with `max(1, |limit|)`.
pub fn assess(xs: &[f64], ys: &[f64], policy: &TrendPolicy) -> Result<TrendAssessment> {
    let n = ys.len();
    let j = policy.window.max(2);
    let third = n.div_ceil(3);
    let raw_tail = &ys[n - third.min(n)..];
    let raw_band = (
        raw_tail.iter().copied().fold(f64::INFINITY, f64::min),
        raw_tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if n < j + 2 {
        return Ok(TrendAssessment {
            status: TrendStatus::Undetermined,
            limit: ys.last().copied().unwrap_or(f64::NAN),
            oscillation: f64::NAN,
            raw_band,
            limit_band: (f64::NAN, f64::NAN),
            windows_used: 0,
        });
    }
    let first_end = (n - third).max(j - 1);
    let mut limits = Vec::new();
    for end in first_end..n {
        let start = end + 1 - j;
        let fit = fit_line(&xs[start..=end], &ys[start..=end])?;
        limits.push(fit.intercept);
    }
    let lo = limits.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let limit = *limits.last().expect("at least one window");
    let oscillation = hi - lo;
    let scale = limit.abs().max(1.0);
    let status = if limits.len() < 3 {
        TrendStatus::Undetermined
    } else if oscillation <= policy.eps_conv * scale {
        TrendStatus::Converged
    } else if oscillation > policy.eps_osc * scale {
        TrendStatus::Oscillating
    } else {
        TrendStatus::Undetermined
    };
    Ok(TrendAssessment { status, limit, oscillation, raw_band, limit_band: (lo, hi), windows_used: limits.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_converges_to_intercept() {
        let xs: Vec<f64> = (1..=20).map(|j| 1.0 / j as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 5.0 * x).collect();
        let a = assess(&xs, &ys, &TrendPolicy::default()).unwrap();
        assert_eq!(a.status, TrendStatus::Converged);
        assert!((a.limit - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sawtooth_oscillates() {
        let xs: Vec<f64> = (1..=24).map(|j| 1.0 / j as f64).collect();
        let ys: Vec<f64> = (0..24).map(|i| if (i / 3) % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let a = assess(&xs, &ys, &TrendPolicy::default()).unwrap();
        assert_eq!(a.status, TrendStatus::Oscillating);
    }

    #[test]
    fn short_series_is_undetermined() {
        let a = assess(&[1.0, 0.5], &[1.0, 1.0], &TrendPolicy::default()).unwrap();
        assert_eq!(a.status, TrendStatus::Undetermined);
    }
}
