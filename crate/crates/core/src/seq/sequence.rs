use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_to_infinity, CompensatedSum};

/// Asymptotic model `mu_n ~ c * (ln n)^b * n^(-a)` for indices past the data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLogTail {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl PowerLogTail {
    pub fn new(c: f64, a: f64, b: f64) -> Result<Self> {
        if !(c > 0.0 && a > 0.0 && c.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidSequence(format!(
                "tail model needs c > 0, a > 0 and finite b (got c = {c}, a = {a}, b = {b})"
            )));
        }
        Ok(Self { c, a, b })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let log_factor = if self.b == 0.0 { 1.0 } else { u.ln().powf(self.b) };
        self.c * log_factor * u.powf(-self.a)
    }

    /// `lim_k alpha_k` of any sequence ending in this tail.
    pub fn alpha_limit(&self) -> f64 {
        if self.a < 1.0 || (self.a == 1.0 && self.b > 0.0) {
            f64::INFINITY
        } else if self.a == 1.0 && self.b == 0.0 {
            self.c
        } else {
            0.0
        }
    }

    /// `int_{x0}^{x1} tail(u)^s du`; `x1 = inf` allowed.
    pub fn integral_of_power(&self, s: f64, x0: f64, x1: f64) -> Result<f64> {
        let rate = self.a * s - 1.0;
        if x1.is_infinite() && rate <= 0.0 {
            return Err(Error::DivergentZeta(s));
        }
        let cs = self.c.powf(s);
        if self.b == 0.0 {
            if rate == 0.0 {
                return Ok(cs * (x1 / x0).ln());
            }
            let upper = if x1.is_infinite() { 0.0 } else { x1.powf(-rate) };
            return Ok(cs * (x0.powf(-rate) - upper) / rate);
        }
        // u = e^v: integrand c^s v^{bs} e^{-(as-1) v}
        let bs = self.b * s;
        let f = move |v: f64| cs * v.powf(bs) * (-rate * v).exp();
        let (v0, v1) = (x0.ln(), x1.ln());
        if x1.is_infinite() {
            integrate_to_infinity(&f, v0, 1.0)
        } else {
            integrate(&f, v0, v1, 1e-13, 0.0)
        }
    }
}

/// Zeta value with the part contributed by the tail model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaValue {
    pub value: f64,
    pub tail: f64,
}

/// Finite nonincreasing nonnegative sequence standing for `mu_n(T)`,
/// `n = 1..=len`, optionally continued by a tail model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSequence {
    values: Vec<f64>,
    tail: Option<PowerLogTail>,
}

const HEAD_DOMINATION: f64 = 1e-3;

impl SingularSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        Ok(Self { values, tail: None })
    }

    pub fn with_tail(values: Vec<f64>, tail: PowerLogTail) -> Result<Self> {
        validate_values(&values)?;
        let tail = PowerLogTail::new(tail.c, tail.a, tail.b)?;
        let last = *values
            .last()
            .ok_or_else(|| Error::InvalidSequence("a tail model needs at least one explicit value".into()))?;
        let next = (values.len() + 1) as f64;
        if tail.a * next.ln() < tail.b {
            return Err(Error::InvalidSequence(format!("tail model is still increasing at n = {next}")));
        }
        let junction = tail.eval(next);
        if (junction - last).abs() > last {
            return Err(Error::InvalidSequence(format!(
                "tail model value {junction:e} at n = {next} is not within a factor 2 of the last value {last:e}"
            )));
        }
        Ok(Self { values, tail: Some(tail) })
    }

    pub fn empty() -> Self {
        Self { values: Vec::new(), tail: None }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n], tail: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Option<&PowerLogTail> {
        self.tail.as_ref()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// No tail and the data ends in zero: every later value is zero.
    pub fn is_finitely_supported(&self) -> bool {
        self.tail.is_none() && self.values.last().is_none_or(|&v| v == 0.0)
    }

    /// 1-indexed value; the tail model extends past the data.
    pub fn get(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        match self.values.get(n as usize - 1) {
            Some(&v) => Some(v),
            None if self.is_finitely_supported() => Some(0.0),
            None => self.tail.map(|t| t.eval(n as f64)),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {factor} must be finite and >= 0")));
        }
        let values = self.values.iter().map(|v| v * factor).collect();
        match self.tail {
            Some(t) if factor > 0.0 => Self::with_tail(values, PowerLogTail { c: t.c * factor, ..t }),
            _ => Self::new(values),
        }
    }

    /// Largest k for which partial sums are available without extrapolation.
    pub fn horizon(&self) -> u64 {
        if self.tail.is_some() {
            u64::MAX
        } else {
            self.values.len() as u64
        }
    }

    /// `sum_{n <= k} mu_n` at strictly increasing `ks`, in a single pass.
    /// Past the data the tail model is integrated with a midpoint correction.
    pub fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>> {
        check_checkpoints(ks)?;
        let len = self.values.len();
        let mut out = Vec::with_capacity(ks.len());
        let mut acc = CompensatedSum::new();
        let mut done = 0usize;
        for &k in ks {
            if k as usize <= len {
                for &v in &self.values[done..k as usize] {
                    acc.add(v);
                }
                done = k as usize;
                out.push(acc.value());
                continue;
            }
            if self.is_finitely_supported() {
                for &v in &self.values[done..] {
                    acc.add(v);
                }
                done = len;
                out.push(acc.value());
                continue;
            }
            let tail = self.tail.ok_or(Error::CheckpointBeyondData { k, length: len })?;
            for &v in &self.values[done..] {
                acc.add(v);
            }
            done = len;
            let extra = tail.integral_of_power(1.0, len as f64 + 0.5, k as f64 + 0.5)?;
            out.push(acc.value() + extra);
        }
        Ok(out)
    }

    /// `zeta(s) = sum mu_n^s`. Without a tail model the explicit data must
    /// dominate: the remainder estimate `mu_L^s L / (s-1)` has to stay below
    /// 1e-3 of the head sum.
    pub fn zeta(&self, s: f64) -> Result<ZetaValue> {
        if !(s > 0.0) {
            return Err(Error::DivergentZeta(s));
        }
        let head = self.head_power_sum(s);
        match self.tail {
            Some(t) => {
                let tail = t.integral_of_power(s, self.values.len() as f64 + 0.5, f64::INFINITY)?;
                Ok(ZetaValue { value: head + tail, tail })
            }
            None if self.is_finitely_supported() => Ok(ZetaValue { value: head, tail: 0.0 }),
            None => {
                let len = self.values.len() as f64;
                let last = self.values[self.values.len() - 1];
                if s <= 1.0 {
                    return Err(Error::DivergentZeta(s));
                }
                let remainder = last.powf(s) * len / (s - 1.0);
                if remainder > HEAD_DOMINATION * head {
                    return Err(Error::HeadDomination { s, remainder, head });
                }
                Ok(ZetaValue { value: head, tail: 0.0 })
            }
        }
    }

    fn head_power_sum(&self, s: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for &v in &self.values {
            if v == 0.0 {
                break;
            }
            acc.add(v.powf(s));
        }
        acc.value()
    }

    /// `sum_n exp(-(t mu_n)^(-alpha))`, terms with `mu_n = 0` contributing 0.
    pub fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64> {
        if !(t > 0.0 && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "heat trace needs t > 0 and alpha > 0 (t = {t}, alpha = {alpha})"
            )));
        }
        let term = |mu: f64| if mu == 0.0 { 0.0 } else { (-(t * mu).powf(-alpha)).exp() };
        let mut acc = CompensatedSum::new();
        let mut last_term = 0.0;
        for &v in &self.values {
            if v == 0.0 {
                break;
            }
            last_term = term(v);
            acc.add(last_term);
            if last_term < 1e-18 * acc.value() {
                return Ok(acc.value());
            }
        }
        let head = acc.value();
        match self.tail {
            Some(tail) if last_term > 0.0 || self.values.is_empty() => {
                let x0 = self.values.len() as f64 + 0.5;
                let f = move |v: f64| {
                    let u = v.exp();
                    u * term(tail.eval(u))
                };
                Ok(head + integrate_to_infinity(&f, x0.ln(), 1.0)?)
            }
            Some(_) => Ok(head),
            None if self.is_finitely_supported() => Ok(head),
            None => {
                let len = self.values.len() as f64;
                let remainder = last_term * len;
                if remainder > 1e-12 * head.max(f64::MIN_POSITIVE) {
                    return Err(Error::HeadDomination { s: t, remainder, head });
                }
                Ok(head)
            }
        }
    }
}

fn validate_values(values: &[f64]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if !(w[0] >= w[1]) {
            return Err(Error::InvalidSequence(format!(
                "values must be nonincreasing: mu_{} = {} < mu_{} = {}",
                i + 1,
                w[0],
                i + 2,
                w[1]
            )));
        }
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidSequence(format!("mu_{} = {v} is not a finite nonnegative real", i + 1)));
    }
    Ok(())
}

pub(crate) fn check_checkpoints(ks: &[u64]) -> Result<()> {
    let mut prev = 0u64;
    for &k in ks {
        if k <= prev {
            return Err(Error::BadCheckpoints(k));
        }
        prev = k;
    }
    Ok(())
}

/// Moduli sorted nonincreasing (stable, so ties keep input order).
pub fn decreasing_rearrangement(x: &[f64]) -> Result<SingularSequence> {
    let mut values: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidSequence(format!("non-finite entry {bad}")));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularSequence { values, tail: None })
}

pub fn rearrange_moduli(x: &[Complex64]) -> Result<SingularSequence> {
    let moduli: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    decreasing_rearrangement(&moduli)
}

/// Dyadic checkpoints `1, 2, 4, ...` not exceeding `horizon`.
pub fn dyadic_checkpoints(horizon: u64) -> Vec<u64> {
    let mut ks = Vec::new();
    let mut k = 1u64;
    while k <= horizon {
        ks.push(k);
        match k.checked_mul(2) {
            Some(next) => k = next,
            None => break,
        }
    }
    ks
}
