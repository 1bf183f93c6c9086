use serde::{Deserialize, Serialize};

use super::logavg::log_average;
use super::sequence::{dyadic_checkpoints, SingularSequence};
use crate::error::Result;
use crate::trend::{assess, TrendPolicy, TrendStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauberianStatus {
    Tauberian,
    NonTauberian,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauberianPolicy {
    pub trend: TrendPolicy,
    /// Largest dyadic checkpoint considered; defaults to the data length
    /// (a tail model requires an explicit horizon).
    pub horizon: Option<u64>,
    pub min_horizon: u64,
}

impl Default for TauberianPolicy {
    fn default() -> Self {
        Self { trend: TrendPolicy::default(), horizon: None, min_horizon: 1 << 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauberianVerdict {
    pub status: TauberianStatus,
    pub limit_estimate: Option<f64>,
    pub oscillation_amplitude: f64,
    /// (min, max) of alpha over the last third of the dyadic checkpoints.
    pub alpha_band: (f64, f64),
    pub checkpoints: Vec<u64>,
    pub alphas: Vec<f64>,
    pub diagnostic: Option<String>,
}

pub fn tauberian_classify(x: &SingularSequence, policy: &TauberianPolicy) -> Result<TauberianVerdict> {
    if x.is_finitely_supported() {
        return Ok(TauberianVerdict {
            status: TauberianStatus::Tauberian,
            limit_estimate: Some(0.0),
            oscillation_amplitude: 0.0,
            alpha_band: (0.0, 0.0),
            checkpoints: Vec::new(),
            alphas: Vec::new(),
            diagnostic: Some("finitely supported: alpha_k -> 0".into()),
        });
    }
    let horizon = match (policy.horizon, x.tail()) {
        (Some(h), Some(_)) => h,
        (Some(h), None) => h.min(x.len() as u64),
        (None, _) => x.len() as u64,
    };
    let ks: Vec<u64> = dyadic_checkpoints(horizon).into_iter().filter(|&k| k >= 2).collect();
    let series = log_average(x, &ks)?;
    if horizon < policy.min_horizon {
        return Ok(TauberianVerdict {
            status: TauberianStatus::Undetermined,
            limit_estimate: None,
            oscillation_amplitude: f64::NAN,
            alpha_band: (f64::NAN, f64::NAN),
            checkpoints: series.checkpoints,
            alphas: series.alphas,
            diagnostic: Some(format!("horizon {horizon} below minimum {}", policy.min_horizon)),
        });
    }
    let xs: Vec<f64> = ks.iter().map(|&k| 1.0 / (k as f64).ln_1p()).collect();
    let trend = assess(&xs, &series.alphas, &policy.trend)?;
    let status = match trend.status {
        TrendStatus::Converged => TauberianStatus::Tauberian,
        TrendStatus::Oscillating => TauberianStatus::NonTauberian,
        TrendStatus::Undetermined => TauberianStatus::Undetermined,
    };
    Ok(TauberianVerdict {
        status,
        limit_estimate: (status == TauberianStatus::Tauberian).then_some(trend.limit),
        oscillation_amplitude: trend.oscillation,
        alpha_band: trend.raw_band,
        checkpoints: series.checkpoints,
        alphas: series.alphas,
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_is_tauberian() {
        let x = SingularSequence::new((1..=1_000_000).map(|n| 1.0 / n as f64).collect()).unwrap();
        let v = tauberian_classify(&x, &TauberianPolicy::default()).unwrap();
        assert_eq!(v.status, TauberianStatus::Tauberian);
        assert!((v.limit_estimate.unwrap() - 1.0).abs() < 1e-3);
        assert!(v.oscillation_amplitude <= TauberianPolicy::default().trend.eps_conv);
    }

    #[test]
    fn zero_sequence_is_tauberian_with_limit_zero() {
        let v = tauberian_classify(&SingularSequence::zeros(10), &TauberianPolicy::default()).unwrap();
        assert_eq!(v.status, TauberianStatus::Tauberian);
        assert_eq!(v.limit_estimate, Some(0.0));
    }

    #[test]
    fn short_horizon_is_undetermined() {
        let x = SingularSequence::new((1..=500).map(|n| 1.0 / n as f64).collect()).unwrap();
        let v = tauberian_classify(&x, &TauberianPolicy::default()).unwrap();
        assert_eq!(v.status, TauberianStatus::Undetermined);
        assert!(v.diagnostic.unwrap().contains("500"));
    }
}
