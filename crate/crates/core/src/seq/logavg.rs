use serde::{Deserialize, Serialize};

use super::sequence::{dyadic_checkpoints, SingularSequence, ZetaValue};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// `alpha_k = (sum_{n <= k} mu_n) / ln(1 + k)` at increasing checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogAverageSeries {
    pub checkpoints: Vec<u64>,
    pub alphas: Vec<f64>,
}

impl LogAverageSeries {
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.checkpoints.iter().copied().zip(self.alphas.iter().copied())
    }
}

pub fn log_average(x: &SingularSequence, ks: &[u64]) -> Result<LogAverageSeries> {
    let sums = x.partial_sums(ks)?;
    let alphas = ks.iter().zip(sums).map(|(&k, s)| s / (k as f64).ln_1p()).collect();
    Ok(LogAverageSeries { checkpoints: ks.to_vec(), alphas })
}

/// `||x||_{1,inf} = sup_k alpha_k`, scanning every k of the data. Past the
/// data, alpha moves monotonically toward the tail's limit, so that limit
/// is the only further candidate.
pub fn norm_1_inf(x: &SingularSequence) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut best = 0.0f64;
    for (i, &v) in x.values().iter().enumerate() {
        acc.add(v);
        best = best.max(acc.value() / ((i + 1) as f64).ln_1p());
    }
    match x.tail() {
        Some(t) => best.max(t.alpha_limit()),
        None => best,
    }
}

/// Partial sums of `y` never exceed those of `x` (shorter one zero-padded).
/// Comparisons carry a 1e-12 relative allowance for summation rounding.
pub fn submajorizes(x: &SingularSequence, y: &SingularSequence) -> bool {
    let horizon = x.len().max(y.len());
    let mut sx = CompensatedSum::new();
    let mut sy = CompensatedSum::new();
    for i in 0..horizon {
        sx.add(x.values().get(i).copied().unwrap_or(0.0));
        sy.add(y.values().get(i).copied().unwrap_or(0.0));
        let (a, b) = (sx.value(), sy.value());
        if b > a + 1e-12 * a.abs().max(b.abs()) {
            return false;
        }
    }
    true
}

/// Computable stand-in for the Riesz seminorm: the largest `alpha_k` over the
/// dyadic checkpoints past the burn-in fraction of the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyPolicy {
    pub burn_in_fraction: f64,
    pub horizon: Option<u64>,
}

impl Default for ProxyPolicy {
    fn default() -> Self {
        Self { burn_in_fraction: 0.5, horizon: None }
    }
}

/// With a tail model attached the limsup is read off the tail.
pub fn riesz_seminorm_proxy(x: &SingularSequence, policy: &ProxyPolicy) -> Result<f64> {
    if x.is_finitely_supported() {
        return Ok(0.0);
    }
    if let Some(t) = x.tail() {
        return Ok(t.alpha_limit());
    }
    let horizon = policy.horizon.unwrap_or(x.len() as u64);
    let ks = dyadic_checkpoints(horizon);
    let series = log_average(x, &ks)?;
    let skip = ((ks.len() as f64) * policy.burn_in_fraction).floor() as usize;
    Ok(series.alphas[skip.min(ks.len().saturating_sub(1))..].iter().copied().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaNorm {
    pub value: f64,
    /// `(k, (1/k) ||x||_{1+1/k})` for every schedule point that could be evaluated.
    pub schedule: Vec<(u64, f64)>,
    /// Schedule points rejected by the head-domination test.
    pub skipped: Vec<u64>,
}

pub fn default_z1_schedule() -> Vec<u64> {
    (1..=12).map(|j| 1u64 << j).collect()
}

/// `limsup_k (1/k) (sum mu_n^{1+1/k})^{k/(k+1)}`, read as the maximum over the
/// trailing half of the evaluable schedule.
pub fn zeta_norm_z1(x: &SingularSequence, ks: &[u64]) -> Result<ZetaNorm> {
    if x.is_finitely_supported() {
        return Ok(ZetaNorm { value: 0.0, schedule: Vec::new(), skipped: Vec::new() });
    }
    zeta_norm_with(|s| x.zeta(s), ks)
}

/// Same norm from any zeta evaluator, e.g. a sequence known by formula.
pub fn zeta_norm_with<F: Fn(f64) -> Result<ZetaValue>>(zeta: F, ks: &[u64]) -> Result<ZetaNorm> {
    let mut schedule = Vec::new();
    let mut skipped = Vec::new();
    for &k in ks {
        if k == 0 {
            return Err(Error::BadCheckpoints(0));
        }
        let s = 1.0 + 1.0 / k as f64;
        match zeta(s) {
            Ok(z) => schedule.push((k, z.value.powf(1.0 / s) / k as f64)),
            Err(Error::HeadDomination { .. }) => skipped.push(k),
            Err(Error::DivergentZeta(_)) => schedule.push((k, f64::INFINITY)),
            Err(e) => return Err(e),
        }
    }
    let start = schedule.len() / 2;
    let value = schedule[start..].iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(ZetaNorm { value, schedule, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::PowerLogTail;

    fn harmonic(n: usize) -> SingularSequence {
        SingularSequence::new((1..=n).map(|k| 1.0 / k as f64).collect()).unwrap()
    }

    #[test]
    fn harmonic_log_average_at_100() {
        // oracle: direct summation of H_100 divided by ln 101
        let h100: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        let expect = h100 / 101f64.ln();
        let got = log_average(&harmonic(200), &[100]).unwrap().alphas[0];
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 1.12399).abs() < 1e-5);
    }

    #[test]
    fn trivial_log_averages() {
        let z = log_average(&SingularSequence::zeros(50), &[1, 10, 50]).unwrap();
        assert!(z.alphas.iter().all(|&a| a == 0.0));
        let mut v = vec![0.0; 64];
        v[0] = 1.0;
        let e1 = SingularSequence::new(v).unwrap();
        let s = log_average(&e1, &[1, 7, 64]).unwrap();
        for (k, a) in s.iter() {
            assert!((a - 1.0 / (k as f64).ln_1p()).abs() < 1e-15);
        }
    }

    #[test]
    fn beyond_data_names_k() {
        let err = log_average(&harmonic(10), &[5, 11]).unwrap_err();
        assert_eq!(err, Error::CheckpointBeyondData { k: 11, length: 10 });
    }

    #[test]
    fn norm_examples() {
        let inv_ln2 = 1.0 / 2f64.ln();
        assert!((norm_1_inf(&harmonic(10_000)) - inv_ln2).abs() < 1e-15);
        assert_eq!(norm_1_inf(&SingularSequence::zeros(10)), 0.0);
        assert_eq!(norm_1_inf(&SingularSequence::empty()), 0.0);
        let e1 = SingularSequence::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!((norm_1_inf(&e1) - inv_ln2).abs() < 1e-15);
    }

    #[test]
    fn norm_matches_exhaustive_scan() {
        let x = SingularSequence::new(vec![0.3, 0.29, 0.28, 0.27, 0.05, 0.0]).unwrap();
        let mut best = 0.0f64;
        for k in 1..=x.len() {
            let s: f64 = x.values()[..k].iter().sum();
            best = best.max(s / (k as f64 + 1.0).ln());
        }
        assert!((norm_1_inf(&x) - best).abs() < 1e-15);
    }

    #[test]
    fn submajorization_examples() {
        let h = harmonic(10);
        assert!(submajorizes(&h, &h));
        let x = SingularSequence::new(vec![1.0, 0.0, 0.0]).unwrap();
        let y = SingularSequence::new(vec![0.6, 0.6, 0.0]).unwrap();
        assert!(!submajorizes(&x, &y));
        assert!(!submajorizes(&y, &x));
    }

    #[test]
    fn proxy_and_z1_on_finite_support() {
        let x = SingularSequence::new(vec![1.0, 0.5, 0.0]).unwrap();
        assert_eq!(riesz_seminorm_proxy(&x, &ProxyPolicy::default()).unwrap(), 0.0);
        assert_eq!(zeta_norm_z1(&x, &default_z1_schedule()).unwrap().value, 0.0);
        assert_eq!(zeta_norm_z1(&SingularSequence::zeros(4), &[2, 4]).unwrap().value, 0.0);
    }

    #[test]
    fn harmonic_z1_sandwich() {
        let vals: Vec<f64> = (1..=100_000).map(|k| 1.0 / k as f64).collect();
        let x = SingularSequence::with_tail(vals, PowerLogTail { c: 1.0, a: 1.0, b: 0.0 }).unwrap();
        let z1 = zeta_norm_z1(&x, &default_z1_schedule()).unwrap();
        assert!(z1.skipped.is_empty());
        assert!((z1.value - 1.0).abs() < 5e-3, "{}", z1.value);
        let proxy = riesz_seminorm_proxy(&x, &ProxyPolicy::default()).unwrap();
        let norm = norm_1_inf(&x);
        assert!((-1f64).exp() * proxy <= z1.value && z1.value <= norm);
        assert!(((-1f64).exp() - 0.3679).abs() < 1e-4 && (norm - 1.0 / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tail_sets_the_asymptotic_quantities() {
        // alpha_k rises toward c for a head that starts below c/n
        let head: Vec<f64> = (1..=1000).map(|k| 2.0 / (k as f64 + 5.0)).collect();
        let x = SingularSequence::with_tail(head, PowerLogTail::new(2.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(norm_1_inf(&x), 2.0);
        assert_eq!(riesz_seminorm_proxy(&x, &ProxyPolicy::default()).unwrap(), 2.0);
        let trace_class =
            SingularSequence::with_tail(vec![1.0, 0.5], PowerLogTail::new(1.0, 2.0, 0.0).unwrap()).unwrap();
        assert_eq!(riesz_seminorm_proxy(&trace_class, &ProxyPolicy::default()).unwrap(), 0.0);
        let outside = SingularSequence::with_tail(vec![4.0; 10], PowerLogTail::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(norm_1_inf(&outside).is_infinite());
    }
}
