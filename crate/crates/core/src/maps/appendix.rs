use serde::{Deserialize, Serialize};

use super::discrete::{cesaro_discrete, floor_embed, linear_embed, restrict_window_avg, shift_discrete};
use super::piecewise::{shift_cont, PieceKind, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// Map pairs `(G, H)` whose commutator `GH - HG` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapPair {
    ShiftFloor(usize),
    ShiftLinear(usize),
    CesaroFloor,
    CesaroLinear,
    /// `(T_j, rE)`, evaluated at integers.
    ShiftWindow(usize),
    /// `(C, rE)`, evaluated at integers.
    CesaroWindow,
}

#[derive(Clone, Copy, Debug)]
pub enum DefectInput<'a> {
    Sequence(&'a [f64]),
    Function(&'a PiecewiseFunction),
}

fn beyond(t: f64, limit: f64) -> Error {
    Error::BeyondHorizon { t, horizon: limit }
}

fn need_sequence<'a>(input: DefectInput<'a>, pair: MapPair) -> Result<&'a [f64]> {
    match input {
        DefectInput::Sequence(x) => Ok(x),
        DefectInput::Function(_) => Err(Error::InvalidArgument(format!("{pair:?} acts on sequences"))),
    }
}

fn need_function<'a>(input: DefectInput<'a>, pair: MapPair) -> Result<&'a PiecewiseFunction> {
    match input {
        DefectInput::Function(f) => Ok(f),
        DefectInput::Sequence(_) => Err(Error::InvalidArgument(format!("{pair:?} acts on functions"))),
    }
}

fn need_integer(t: f64) -> Result<u64> {
    if t < 0.0 || t.fract() != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rE commutators are sequences; t = {t} is not a nonnegative integer"
        )));
    }
    Ok(t as u64)
}

/// `|(G H - H G)(input)(t)|` on the exact representation.
pub fn commutator_defect(pair: MapPair, input: DefectInput<'_>, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    let d = match pair {
        MapPair::ShiftFloor(j) | MapPair::ShiftLinear(j) => {
            let x = need_sequence(input, pair)?;
            let shifted = shift_discrete(x, j)?;
            let (embed, embed_shifted) = if matches!(pair, MapPair::ShiftFloor(_)) {
                (floor_embed(x)?, floor_embed(&shifted)?)
            } else {
                (linear_embed(x)?, linear_embed(&shifted)?)
            };
            if !embed_shifted.covers(t) || shifted.is_empty() {
                return Err(beyond(t, embed_shifted.horizon()));
            }
            shift_cont(&embed, j as f64)?.eval(t)? - embed_shifted.eval(t)?
        }
        MapPair::CesaroFloor | MapPair::CesaroLinear => {
            let x = need_sequence(input, pair)?;
            let means = cesaro_discrete(x);
            let (embed, embed_means) = if pair == MapPair::CesaroFloor {
                (floor_embed(x)?, floor_embed(&means)?)
            } else {
                (linear_embed(x)?, linear_embed(&means)?)
            };
            if !embed_means.covers(t) || x.is_empty() {
                return Err(beyond(t, embed_means.horizon()));
            }
            embed.cesaro_at(t)? - embed_means.eval(t)?
        }
        MapPair::ShiftWindow(j) => {
            if j == 0 {
                return Err(Error::InvalidArgument("shift index must be at least 1".into()));
            }
            let f = need_function(input, pair)?;
            let n = need_integer(t)? as f64;
            let jf = j as f64;
            if n + jf + 1.0 > f.horizon() {
                return Err(beyond(t, f.horizon() - jf - 1.0));
            }
            f.integral(n + jf, n + jf + 1.0)? - shift_cont(f, jf)?.integral(n, n + 1.0)?
        }
        MapPair::CesaroWindow => {
            let f = need_function(input, pair)?;
            let n = need_integer(t)?;
            if (n + 1) as f64 > f.horizon() {
                return Err(beyond(t, f.horizon() - 1.0));
            }
            let windows = restrict_window_avg(f)?;
            let mut acc = CompensatedSum::new();
            for &w in &windows[..=n as usize] {
                acc.add(w);
            }
            acc.value() / (n + 1) as f64 - f.cesaro_integral(n as f64, (n + 1) as f64)?
        }
    };
    Ok(d.abs())
}

/// `K(s) = sup_{t in [s, s+1)} |f(t) - f(s)|`.
pub fn oscillation_k(f: &PiecewiseFunction, s: f64) -> Result<f64> {
    if !(s >= f.domain_start() && s + 1.0 <= f.horizon()) {
        return Err(beyond(s, f.horizon() - 1.0));
    }
    let base = f.eval(s)?;
    let breaks = f.breakpoints();
    let mut best = 0.0f64;
    let mut probe = |t: f64| -> Result<()> {
        best = best.max((f.eval(t)? - base).abs());
        Ok(())
    };
    let first = breaks.partition_point(|&b| b <= s);
    for &b in &breaks[first..] {
        if b >= s + 1.0 {
            break;
        }
        probe(b)?;
    }
    if f.kind() == PieceKind::Linear {
        // linear pieces peak at their ends; the right end is a limit
        probe(s + 1.0)?;
    }
    Ok(best)
}

/// `K` sampled every `step` as a step function over the usable range.
pub fn oscillation_profile(f: &PiecewiseFunction, step: f64) -> Result<PiecewiseFunction> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("profile step must be positive".into()));
    }
    let start = f.domain_start();
    let last = f.horizon() - 1.0;
    let n = ((last - start) / step).floor() as usize;
    if n == 0 {
        return Err(Error::Domain("horizon too short for an oscillation profile".into()));
    }
    let grid: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
    let values = grid.iter().map(|&s| oscillation_k(f, s)).collect::<Result<Vec<_>>>()?;
    let horizon = start + step * n as f64;
    Ok(PiecewiseFunction::new(PieceKind::Step, grid, values, start, horizon, 0.0)?.mark_resampled())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostConvergence {
    pub passes: bool,
    /// `(W, sup_t (1/W) int_t^{t+W} f)` per window.
    pub profile: Vec<(f64, f64)>,
}

/// Uniform window means of a bounded nonnegative `f`: passes when the
/// largest window's sup falls below `tol`. Window starts are sampled every
/// `W / 8`.
pub fn almost_convergence_test(f: &PiecewiseFunction, windows: &[f64], tol: f64) -> Result<AlmostConvergence> {
    if windows.is_empty() || windows.windows(2).any(|w| !(w[0] < w[1])) || !(windows[0] > 0.0) {
        return Err(Error::InvalidArgument("window schedule must be positive and increasing".into()));
    }
    let start = f.domain_start();
    let w_max = windows[windows.len() - 1];
    if f.horizon() - start < w_max {
        return Err(Error::BeyondHorizon { t: start + w_max, horizon: f.horizon() });
    }
    let breaks = f.breakpoints();
    for (i, &b) in breaks.iter().enumerate() {
        let end = breaks.get(i + 1).copied().unwrap_or(f.horizon());
        let lo = f.eval(b)?;
        let hi = if end > b { f.eval(end - (end - b) * 1e-12)? } else { lo };
        if lo < 0.0 || hi < 0.0 {
            return Err(Error::InvalidArgument(format!("f must be nonnegative (f({b}) = {lo})")));
        }
    }
    let mut profile = Vec::with_capacity(windows.len());
    for &w in windows {
        let h = w / 8.0;
        let mut sup = 0.0f64;
        let mut t = start;
        while t + w <= f.horizon() {
            let mean = (f.antiderivative(t + w)? - f.antiderivative(t)?) / w;
            sup = sup.max(mean);
            t += h;
        }
        profile.push((w, sup));
    }
    let passes = profile.last().is_some_and(|p| p.1 <= tol);
    Ok(AlmostConvergence { passes, profile })
}
