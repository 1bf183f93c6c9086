use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::LatticeModel;
use crate::numerics::{harmonic_number, integrate, integrate_to_infinity, riemann_zeta, CompensatedSum};
use crate::seq::{check_checkpoints, SingularSequence, ZetaValue};

/// Anything that can report partial sums, zeta values and heat sums of a
/// nonincreasing nonnegative spectrum.
pub trait SpectralSource: Sync {
    fn label(&self) -> String;
    /// Largest index whose partial sum is available; `u64::MAX` when unbounded.
    fn horizon(&self) -> u64;
    fn is_finitely_supported(&self) -> bool;
    fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>>;
    fn zeta(&self, s: f64) -> Result<ZetaValue>;
    /// `sum_n exp(-(t mu_n)^(-alpha))`.
    fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64>;
}

impl SpectralSource for SingularSequence {
    fn label(&self) -> String {
        match self.tail() {
            Some(_) => format!("sequence[{}]+tail", self.len()),
            None => format!("sequence[{}]", self.len()),
        }
    }

    fn horizon(&self) -> u64 {
        if self.is_finitely_supported() {
            u64::MAX
        } else {
            SingularSequence::horizon(self)
        }
    }

    fn is_finitely_supported(&self) -> bool {
        SingularSequence::is_finitely_supported(self)
    }

    fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>> {
        SingularSequence::partial_sums(self, ks)
    }

    fn zeta(&self, s: f64) -> Result<ZetaValue> {
        SingularSequence::zeta(self, s)
    }

    fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64> {
        SingularSequence::heat_sum(self, t, alpha)
    }
}

impl SpectralSource for LatticeModel {
    fn label(&self) -> String {
        format!("torus(n={}, cutoff={}, stride={})", self.dimension(), self.cutoff(), self.stride())
    }

    fn horizon(&self) -> u64 {
        u64::MAX
    }

    fn is_finitely_supported(&self) -> bool {
        false
    }

    fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>> {
        LatticeModel::partial_sums(self, ks)
    }

    fn zeta(&self, s: f64) -> Result<ZetaValue> {
        LatticeModel::zeta(self, s)
    }

    fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64> {
        LatticeModel::heat_sum(self, t, alpha)
    }
}

/// Sequences given by a formula in `n`, evaluable at any index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticSequence {
    /// `c / n`.
    Harmonic { c: f64 },
    /// `c (1 + ln n)^b n^(-a)`, nonincreasing for `b <= a`.
    PowerLog { c: f64, a: f64, b: f64 },
    /// `scale (2 + sin ln ln m) / m` with `m = max(n, 3)`.
    Oscillator { scale: f64 },
}

/// Terms summed explicitly before switching to an integral.
const DIRECT_TERMS: u64 = 1 << 20;
/// Partial sums are explicit up to this index.
const DIRECT_PARTIAL: u64 = 1 << 24;

impl AnalyticSequence {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AnalyticSequence::Harmonic { c } => c > 0.0 && c.is_finite(),
            AnalyticSequence::PowerLog { c, a, b } => {
                c > 0.0 && c.is_finite() && a > 0.0 && a.is_finite() && b.is_finite() && b <= a && b >= 0.0
            }
            AnalyticSequence::Oscillator { scale } => scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSequence(format!("invalid parameters for {self:?}")))
        }
    }

    /// `mu(u)` for real `u >= 1`.
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            AnalyticSequence::Harmonic { c } => c / u,
            AnalyticSequence::PowerLog { c, a, b } => c * (1.0 + u.ln()).powf(b) * u.powf(-a),
            AnalyticSequence::Oscillator { scale } => {
                let m = u.max(3.0);
                scale * (2.0 + m.ln().ln().sin()) / m
            }
        }
    }

    /// `ln(u mu(u))` at `u = e^v`, kept free of the cancellation in
    /// `v + ln mu(e^v)` for large `v`.
    fn ln_u_mu(&self, v: f64) -> f64 {
        match *self {
            AnalyticSequence::Harmonic { c } => c.ln(),
            AnalyticSequence::PowerLog { c, a, b } => c.ln() + b * v.ln_1p() + (1.0 - a) * v,
            AnalyticSequence::Oscillator { scale } => {
                let w = v.max(3f64.ln());
                scale.ln() + (2.0 + w.ln().sin()).ln() + (v - w)
            }
        }
    }

    pub fn materialize(&self, len: usize) -> Result<SingularSequence> {
        self.validate()?;
        SingularSequence::new((1..=len).map(|n| self.eval(n as f64)).collect())
    }

    /// Exponent `a` of the power-law decay.
    fn decay(&self) -> f64 {
        match *self {
            AnalyticSequence::PowerLog { a, .. } => a,
            _ => 1.0,
        }
    }

    /// `int_{x0}^{x1} mu(u)^s du` in the variable `v = ln u`.
    fn power_integral(&self, s: f64, x0: f64, x1: f64) -> Result<f64> {
        if x1.is_infinite() && self.decay() * s <= 1.0 {
            return Err(Error::DivergentZeta(s));
        }
        let f = |v: f64| ((1.0 - s) * v + s * self.ln_u_mu(v)).exp();
        if x1.is_infinite() {
            integrate_to_infinity(&f, x0.ln(), 1.0)
        } else {
            // split into unit pieces in v to keep the oscillating factor resolved
            let (v0, v1) = (x0.ln(), x1.ln());
            let pieces = (v1 - v0).ceil().max(1.0) as usize;
            let h = (v1 - v0) / pieces as f64;
            let mut acc = CompensatedSum::new();
            for i in 0..pieces {
                acc.add(integrate(&f, v0 + i as f64 * h, v0 + (i + 1) as f64 * h, 1e-13, 0.0)?);
            }
            Ok(acc.value())
        }
    }
}

impl SpectralSource for AnalyticSequence {
    fn label(&self) -> String {
        match *self {
            AnalyticSequence::Harmonic { c } => format!("harmonic(c={c})"),
            AnalyticSequence::PowerLog { c, a, b } => format!("power_log(c={c}, a={a}, b={b})"),
            AnalyticSequence::Oscillator { scale } => format!("oscillator(scale={scale})"),
        }
    }

    fn horizon(&self) -> u64 {
        u64::MAX
    }

    fn is_finitely_supported(&self) -> bool {
        false
    }

    fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>> {
        self.validate()?;
        check_checkpoints(ks)?;
        if let AnalyticSequence::Harmonic { c } = *self {
            return Ok(ks.iter().map(|&k| c * harmonic_number(k)).collect());
        }
        let mut out = Vec::with_capacity(ks.len());
        let mut acc = CompensatedSum::new();
        let mut done = 0u64;
        for &k in ks {
            let stop = k.min(DIRECT_PARTIAL);
            for n in done + 1..=stop {
                acc.add(self.eval(n as f64));
            }
            done = done.max(stop);
            if k <= DIRECT_PARTIAL {
                out.push(acc.value());
            } else {
                let extra = self.power_integral(1.0, DIRECT_PARTIAL as f64 + 0.5, k as f64 + 0.5)?;
                out.push(acc.value() + extra);
            }
        }
        Ok(out)
    }

    fn zeta(&self, s: f64) -> Result<ZetaValue> {
        self.validate()?;
        if let AnalyticSequence::Harmonic { c } = *self {
            return Ok(ZetaValue { value: c.powf(s) * riemann_zeta(s)?, tail: 0.0 });
        }
        if self.decay() * s <= 1.0 {
            return Err(Error::DivergentZeta(s));
        }
        let mut acc = CompensatedSum::new();
        for n in 1..=DIRECT_TERMS {
            acc.add(self.eval(n as f64).powf(s));
        }
        let tail = self.power_integral(s, DIRECT_TERMS as f64 + 0.5, f64::INFINITY)?;
        Ok(ZetaValue { value: acc.value() + tail, tail })
    }

    fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64> {
        self.validate()?;
        if !(t > 0.0 && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "heat trace needs t > 0 and alpha > 0 (t = {t}, alpha = {alpha})"
            )));
        }
        if let (AnalyticSequence::Harmonic { c }, true) = (*self, alpha == 1.0) {
            // geometric series in q = exp(-1/(c t))
            let x = 1.0 / (c * t);
            return Ok(1.0 / x.exp_m1());
        }
        let term = |u: f64| (-(t * self.eval(u)).powf(-alpha)).exp();
        let mut acc = CompensatedSum::new();
        let mut last = 0.0;
        for n in 1..=DIRECT_TERMS {
            last = term(n as f64);
            acc.add(last);
            if last < 1e-18 * acc.value() {
                return Ok(acc.value());
            }
        }
        let f = |v: f64| (v - (-alpha * (t.ln() + self.ln_u_mu(v) - v)).exp()).exp();
        let tail = if last == 0.0 { 0.0 } else { integrate_to_infinity(&f, (DIRECT_TERMS as f64 + 0.5).ln(), 1.0)? };
        Ok(acc.value() + tail)
    }
}
