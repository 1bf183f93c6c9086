use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceKind {
    Step,
    Linear,
}

/// Default ratio between consecutive points when a map has to resample.
pub const RESAMPLE_RATIO: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    start: f64,
    value: f64,
    slope: f64,
}

impl Segment {
    fn at(&self, t: f64) -> f64 {
        if self.slope == 0.0 {
            self.value
        } else {
            self.value + self.slope * (t - self.start)
        }
    }

    /// `int_a^b` of the affine piece, `start <= a <= b <= end`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        if self.slope == 0.0 {
            self.value * (b - a)
        } else {
            0.5 * (self.at(a) + self.at(b)) * (b - a)
        }
    }
}

/// A bounded function on `[domain_start, inf)`: step (right-continuous) or
/// continuous piecewise-linear up to `horizon`, then the constant
/// `tail_value`. A linear function is held constant from its last
/// breakpoint up to the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction {
    kind: PieceKind,
    domain_start: f64,
    horizon: f64,
    tail_value: f64,
    resampled: bool,
    segments: Vec<Segment>,
    /// `int_{domain_start}^{segments[i].start} f`
    cumulative: Vec<f64>,
}

/// A value together with whether the constant tail supplied it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub from_tail: bool,
}

impl PiecewiseFunction {
    pub fn new(
        kind: PieceKind,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        domain_start: f64,
        horizon: f64,
        tail_value: f64,
    ) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching nonempty breakpoints and values ({} vs {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != domain_start {
            return Err(Error::InvalidArgument(format!(
                "first breakpoint {} must equal the domain start {domain_start}",
                breakpoints[0]
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        let last = breakpoints[breakpoints.len() - 1];
        if !(horizon >= last) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon {horizon} precedes the last breakpoint {last}")));
        }
        if values.iter().chain([&tail_value]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite".into()));
        }
        let mut segments = Vec::with_capacity(breakpoints.len());
        for i in 0..breakpoints.len() {
            let slope = match (kind, breakpoints.get(i + 1)) {
                (PieceKind::Linear, Some(&next)) => (values[i + 1] - values[i]) / (next - breakpoints[i]),
                _ => 0.0,
            };
            segments.push(Segment { start: breakpoints[i], value: values[i], slope });
        }
        Ok(Self::from_segments(kind, domain_start, horizon, tail_value, false, segments))
    }

    pub fn constant(c: f64, domain_start: f64, horizon: f64) -> Result<Self> {
        Self::new(PieceKind::Step, vec![domain_start], vec![c], domain_start, horizon, c)
    }

    /// Linear interpolation of `f` on the given increasing grid.
    pub fn from_samples<F: Fn(f64) -> f64>(grid: &[f64], f: F, horizon: f64, tail_value: f64) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        let mut out = Self::new(PieceKind::Linear, grid.to_vec(), values, grid[0], horizon, tail_value)?;
        out.resampled = true;
        Ok(out)
    }

    fn from_segments(
        kind: PieceKind,
        domain_start: f64,
        horizon: f64,
        tail_value: f64,
        resampled: bool,
        segments: Vec<Segment>,
    ) -> Self {
        let mut cumulative = Vec::with_capacity(segments.len());
        let mut acc = CompensatedSum::new();
        for (i, s) in segments.iter().enumerate() {
            cumulative.push(acc.value());
            let end = segments.get(i + 1).map_or(horizon, |n| n.start);
            acc.add(s.integral(s.start, end));
        }
        Self { kind, domain_start, horizon, tail_value, resampled, segments, cumulative }
    }

    pub(crate) fn mark_resampled(mut self) -> Self {
        self.resampled = true;
        self
    }

    pub fn kind(&self) -> PieceKind {
        self.kind
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn tail_value(&self) -> f64 {
        self.tail_value
    }

    /// True when a map could not be represented exactly and was resampled.
    pub fn is_resampled(&self) -> bool {
        self.resampled
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.start).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.value).collect()
    }

    /// Largest absolute value, tail included.
    pub fn sup_norm(&self) -> f64 {
        let mut m = self.tail_value.abs();
        for (i, s) in self.segments.iter().enumerate() {
            let end = self.segment_end(i);
            m = m.max(s.value.abs()).max(s.at(end).abs());
        }
        m
    }

    fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(self.horizon, |n| n.start)
    }

    fn locate(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.start <= t).saturating_sub(1)
    }

    /// Whether `t` is inside the represented range (a linear function also
    /// owns its horizon point).
    pub fn covers(&self, t: f64) -> bool {
        t >= self.domain_start && (t < self.horizon || (self.kind == PieceKind::Linear && t == self.horizon))
    }

    pub fn sample(&self, t: f64) -> Result<Sample> {
        if !(t >= self.domain_start) {
            return Err(Error::Domain(format!("t = {t} precedes the domain start {}", self.domain_start)));
        }
        if self.covers(t) {
            let i = self.locate(t);
            Ok(Sample { value: self.segments[i].at(t), from_tail: false })
        } else {
            Ok(Sample { value: self.tail_value, from_tail: true })
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.sample(t)?.value)
    }

    /// `int_a^b f`, summing pieces left to right.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= self.domain_start && b >= a) {
            return Err(Error::Domain(format!("bad integration range [{a}, {b}]")));
        }
        let mut acc = CompensatedSum::new();
        if a < self.horizon {
            let mut i = self.locate(a);
            while i < self.segments.len() {
                let s = &self.segments[i];
                let lo = s.start.max(a);
                let hi = self.segment_end(i).min(b);
                if lo >= b {
                    break;
                }
                if hi > lo {
                    acc.add(s.integral(lo, hi));
                }
                i += 1;
            }
        }
        if b > self.horizon {
            acc.add(self.tail_value * (b - a.max(self.horizon)));
        }
        Ok(acc.value())
    }

    /// `int_{domain_start}^t f` from the precomputed prefix integrals.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        if !(t >= self.domain_start) {
            return Err(Error::Domain(format!("t = {t} precedes the domain start {}", self.domain_start)));
        }
        if t >= self.horizon {
            let total = self.cumulative.last().copied().unwrap_or(0.0) + {
                let i = self.segments.len() - 1;
                self.segments[i].integral(self.segments[i].start, self.horizon)
            };
            return Ok(total + self.tail_value * (t - self.horizon));
        }
        let i = self.locate(t);
        Ok(self.cumulative[i] + self.segments[i].integral(self.segments[i].start, t))
    }

    fn require_origin(&self, what: &str) -> Result<()> {
        if self.domain_start != 0.0 {
            return Err(Error::Domain(format!(
                "{what} needs a function on [0, inf), got domain start {}",
                self.domain_start
            )));
        }
        Ok(())
    }

    /// `C(f)(t) = (1/t) int_0^t f`, with `C(f)(0) = f(0)`.
    pub fn cesaro_at(&self, t: f64) -> Result<f64> {
        self.require_origin("the Cesaro mean")?;
        if t == 0.0 {
            return self.eval(0.0);
        }
        Ok(self.antiderivative(t)? / t)
    }

    /// `int_a^b C(f)(t) dt`, exact: on each piece the primitive
    /// `F(t) = p + q t + r t^2` gives `p ln t + q t + r t^2 / 2`.
    pub fn cesaro_integral(&self, a: f64, b: f64) -> Result<f64> {
        self.require_origin("the Cesaro mean")?;
        if !(a >= 0.0 && b >= a) {
            return Err(Error::Domain(format!("bad integration range [{a}, {b}]")));
        }
        let mut pieces: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // lo, hi, p, q, r
        let mut i = self.locate(a);
        while i < self.segments.len() {
            let s = &self.segments[i];
            let end = self.segment_end(i);
            let lo = s.start.max(a);
            let hi = end.min(b);
            if lo >= b {
                break;
            }
            if hi > lo {
                // F(t) = F_i + v (t - s0) + m (t - s0)^2 / 2
                let (f0, v, m, s0) = (self.cumulative[i], s.value, s.slope, s.start);
                let p = f0 - v * s0 + 0.5 * m * s0 * s0;
                let q = v - m * s0;
                let r = 0.5 * m;
                pieces.push((lo, hi, p, q, r));
            }
            i += 1;
        }
        if b > self.horizon {
            let lo = a.max(self.horizon);
            let total = self.antiderivative(self.horizon)?;
            let p = total - self.tail_value * self.horizon;
            pieces.push((lo, b, p, self.tail_value, 0.0));
        }
        let mut acc = CompensatedSum::new();
        for (lo, hi, p, q, r) in pieces {
            if p != 0.0 {
                if lo == 0.0 {
                    return Err(Error::Domain("Cesaro mean unbounded at the origin".into()));
                }
                acc.add(p * (hi / lo).ln());
            }
            acc.add(q * (hi - lo));
            acc.add(0.5 * r * (hi - lo) * (hi + lo));
        }
        Ok(acc.value())
    }

    /// Rebuilds the function from transformed segment starts; the segment
    /// map must be increasing. Segments pushed before the new domain start
    /// are clipped there.
    fn remap(&self, domain_start: f64, horizon: f64, map: impl Fn(&Segment) -> Segment) -> Result<Self> {
        if !(horizon > domain_start) {
            return Err(Error::Domain(format!("the map leaves nothing below the horizon ({horizon})")));
        }
        let mapped: Vec<Segment> = self.segments.iter().map(map).collect();
        let mut segments = Vec::with_capacity(mapped.len());
        for (i, s) in mapped.iter().enumerate() {
            let end = mapped.get(i + 1).map_or(horizon, |n| n.start);
            if end <= domain_start || s.start >= horizon {
                continue;
            }
            if s.start < domain_start {
                segments.push(Segment { start: domain_start, value: s.at(domain_start), slope: s.slope });
            } else {
                segments.push(*s);
            }
        }
        if segments.first().map(|s| s.start) != Some(domain_start) {
            return Err(Error::Domain(format!("no values available at the domain start {domain_start}")));
        }
        Ok(Self::from_segments(self.kind, domain_start, horizon, self.tail_value, self.resampled, segments))
    }

    /// Resamples `g` with ratio-bounded spacing between `knots`.
    fn resample_on(knots: &[f64], g: impl Fn(f64) -> f64, horizon: f64, tail_value: f64, ratio: f64) -> Result<Self> {
        let mut grid = Vec::new();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let pieces = if a <= 0.0 { 16 } else { ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize };
            for k in 0..pieces {
                let t = if a <= 0.0 {
                    a + (b - a) * k as f64 / pieces as f64
                } else {
                    a * (b / a).powf(k as f64 / pieces as f64)
                };
                grid.push(t);
            }
        }
        grid.push(*knots.last().expect("knots"));
        grid.dedup();
        Self::from_samples(&grid, g, horizon, tail_value)
    }

    fn knots_with_horizon(&self, map: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut k: Vec<f64> = self.segments.iter().map(|s| map(s.start)).collect();
        let h = map(self.horizon);
        if h > *k.last().expect("segments") {
            k.push(h);
        }
        k
    }
}

fn positive(a: f64, what: &str) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} parameter must be positive, got {a}")));
    }
    Ok(())
}

/// `T_a(f)(t) = f(t + a)`.
pub fn shift_cont(f: &PiecewiseFunction, a: f64) -> Result<PiecewiseFunction> {
    positive(a, "shift")?;
    f.remap(f.domain_start, f.horizon - a, |s| Segment { start: s.start - a, ..*s })
}

/// `D_a(f)(t) = f(t / a)`.
pub fn dilate_cont(f: &PiecewiseFunction, a: f64) -> Result<PiecewiseFunction> {
    positive(a, "dilation")?;
    f.remap(f.domain_start, f.horizon * a, |s| Segment { start: s.start * a, value: s.value, slope: s.slope / a })
}

/// `P_a(f)(t) = f(t^a)`. Exact for step functions; linear pieces are
/// resampled on a geometric grid.
pub fn power_cont(f: &PiecewiseFunction, a: f64) -> Result<PiecewiseFunction> {
    power_cont_with_ratio(f, a, RESAMPLE_RATIO)
}

pub fn power_cont_with_ratio(f: &PiecewiseFunction, a: f64, ratio: f64) -> Result<PiecewiseFunction> {
    positive(a, "power")?;
    let inv = 1.0 / a;
    match f.kind {
        PieceKind::Step => f.remap(f.domain_start, f.horizon.powf(inv), |s| Segment { start: s.start.powf(inv), ..*s }),
        PieceKind::Linear => {
            let knots = f.knots_with_horizon(|t| t.powf(inv));
            let g = |t: f64| f.eval(t.powf(a)).unwrap_or(f.tail_value);
            PiecewiseFunction::resample_on(&knots, g, f.horizon.powf(inv), f.tail_value, ratio)
        }
    }
}

/// `C(f)(t) = (1/t) int_0^t f`, resampled on a geometric grid; use
/// [`PiecewiseFunction::cesaro_at`] for exact values.
pub fn cesaro_cont(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    f.require_origin("the Cesaro mean")?;
    let knots = f.knots_with_horizon(|t| t);
    let g = |t: f64| f.cesaro_at(t).unwrap_or(f.tail_value);
    let mut out = PiecewiseFunction::resample_on(&knots, g, f.horizon, f.tail_value, RESAMPLE_RATIO)?;
    if f.segments.len() == 1 && f.segments[0].slope == 0.0 && f.segments[0].value == f.tail_value {
        out.resampled = false;
    }
    Ok(out)
}

/// `L^{-1}(g)(t) = g(e^t)`, from `[1, inf)` to `[0, inf)`.
pub fn exp_conjugate(g: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    if g.domain_start != 1.0 {
        return Err(Error::Domain(format!("L^-1 needs a function on [1, inf), got domain start {}", g.domain_start)));
    }
    log_reparametrize(g, f64::ln, f64::exp, 0.0)
}

/// `L(f)(t) = f(ln t)`, from `[0, inf)` to `[1, inf)`.
pub fn log_conjugate(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    f.require_origin("L")?;
    log_reparametrize(f, f64::exp, f64::ln, 1.0)
}

/// Reparametrizes through `forward` (new abscissa of an old breakpoint)
/// and `back` (old abscissa of a new point).
fn log_reparametrize(
    f: &PiecewiseFunction,
    forward: fn(f64) -> f64,
    back: fn(f64) -> f64,
    domain_start: f64,
) -> Result<PiecewiseFunction> {
    let horizon = forward(f.horizon);
    match f.kind {
        PieceKind::Step => {
            let mut segments: Vec<Segment> =
                f.segments.iter().map(|s| Segment { start: forward(s.start), value: s.value, slope: 0.0 }).collect();
            segments[0].start = domain_start;
            Ok(PiecewiseFunction::from_segments(
                PieceKind::Step,
                domain_start,
                horizon,
                f.tail_value,
                f.resampled,
                segments,
            ))
        }
        PieceKind::Linear => {
            let mut knots = f.knots_with_horizon(forward);
            knots[0] = domain_start;
            let g = |t: f64| f.eval(back(t).max(f.domain_start)).unwrap_or(f.tail_value);
            let mut grid = Vec::new();
            for w in knots.windows(2) {
                let n = 16;
                for k in 0..n {
                    grid.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
                }
            }
            grid.push(*knots.last().expect("knots"));
            grid.dedup();
            PiecewiseFunction::from_samples(&grid, g, horizon, f.tail_value)
        }
    }
}

/// `L(G) = L o G o L^{-1}` applied to `g` on `[1, inf)`.
pub fn conjugate<G>(g: &PiecewiseFunction, map: G) -> Result<PiecewiseFunction>
where
    G: Fn(&PiecewiseFunction) -> Result<PiecewiseFunction>,
{
    log_conjugate(&map(&exp_conjugate(g)?)?)
}

/// Decreasing rearrangement of a step function with respect to Lebesgue
/// measure, laid out from the domain start.
pub fn step_rearrangement(g: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    if g.kind != PieceKind::Step {
        return Err(Error::InvalidArgument("rearrangement is implemented for step functions".into()));
    }
    let mut pieces: Vec<(f64, f64)> = g
        .segments
        .iter()
        .enumerate()
        .map(|(i, s)| (s.value.abs(), g.segment_end(i) - s.start))
        .filter(|p| p.1 > 0.0)
        .collect();
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut segments = Vec::with_capacity(pieces.len());
    let mut t = g.domain_start;
    for (v, len) in pieces {
        if segments.last().map(|s: &Segment| s.value) != Some(v) {
            segments.push(Segment { start: t, value: v, slope: 0.0 });
        }
        t += len;
    }
    Ok(PiecewiseFunction::from_segments(PieceKind::Step, g.domain_start, t, g.tail_value.abs(), g.resampled, segments))
}

/// `alpha_g(t) = (1/ln(1+t)) int_1^t g*` for a step function on `[1, inf)`,
/// sampled on a geometric grid up to the horizon of `g*`.
pub fn log_average_function(g: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    if g.domain_start != 1.0 {
        return Err(Error::Domain("alpha_g needs a function on [1, inf)".into()));
    }
    let star = step_rearrangement(g)?;
    let knots = star.knots_with_horizon(|t| t);
    let alpha = |t: f64| star.antiderivative(t).map(|v| v / t.ln_1p()).unwrap_or(0.0);
    let tail = alpha(star.horizon);
    PiecewiseFunction::resample_on(&knots, alpha, star.horizon, tail, RESAMPLE_RATIO)
}
