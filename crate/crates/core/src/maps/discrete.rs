//! Index maps on finite sequences and the embeddings between sequences
//! and piecewise functions on `[0, inf)`. Sequences here are 0-based.

use super::piecewise::{PieceKind, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

fn positive_index(j: usize, what: &str) -> Result<()> {
    if j == 0 {
        return Err(Error::InvalidArgument(format!("{what} index must be at least 1")));
    }
    Ok(())
}

/// `T_j(a)_k = a_{k+j}`.
pub fn shift_discrete(x: &[f64], j: usize) -> Result<Vec<f64>> {
    positive_index(j, "shift")?;
    Ok(x.get(j..).unwrap_or(&[]).to_vec())
}

/// `D_j(a)_k = a_{ceil(k/j)}` (1-based), i.e. each entry repeated `j` times.
pub fn dilate_discrete(x: &[f64], j: usize) -> Result<Vec<f64>> {
    positive_index(j, "dilation")?;
    Ok(x.iter().flat_map(|&v| std::iter::repeat_n(v, j)).collect())
}

/// Running means `(1/(n+1)) sum_{k <= n} a_k`.
pub fn cesaro_discrete(x: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    x.iter()
        .enumerate()
        .map(|(n, &v)| {
            acc.add(v);
            acc.value() / (n + 1) as f64
        })
        .collect()
}

/// `p(a) = sum_k a_k chi_[k, k+1)`, zero past the data.
pub fn floor_embed(x: &[f64]) -> Result<PiecewiseFunction> {
    if x.is_empty() {
        return PiecewiseFunction::constant(0.0, 0.0, 0.0);
    }
    let breaks = (0..x.len()).map(|k| k as f64).collect();
    PiecewiseFunction::new(PieceKind::Step, breaks, x.to_vec(), 0.0, x.len() as f64, 0.0)
}

/// `p_c(a)`: linear interpolation through `(k, a_k)`, defined up to the
/// last index.
pub fn linear_embed(x: &[f64]) -> Result<PiecewiseFunction> {
    if x.is_empty() {
        return PiecewiseFunction::constant(0.0, 0.0, 0.0);
    }
    let breaks = (0..x.len()).map(|k| k as f64).collect();
    PiecewiseFunction::new(PieceKind::Linear, breaks, x.to_vec(), 0.0, (x.len() - 1) as f64, 0.0)
}

/// `r(f)_k = f(k)` for every integer `k` the representation covers.
pub fn restrict(f: &PiecewiseFunction) -> Result<Vec<f64>> {
    let first = f.domain_start().ceil() as u64;
    let mut out = Vec::new();
    let mut k = first;
    while f.covers(k as f64) {
        out.push(f.eval(k as f64)?);
        k += 1;
    }
    Ok(out)
}

/// `E(f)(t) = int_t^{t+1} f`. Exact (piecewise linear) for step input;
/// linear input is resampled at quarter-unit spacing.
pub fn window_avg(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    let start = f.domain_start();
    let horizon = f.horizon() - 1.0;
    if !(horizon > start) {
        return Err(Error::Domain("window average needs a horizon longer than one unit".into()));
    }
    let mut knots: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .flat_map(|b| [b, b - 1.0])
        .chain([start, horizon])
        .filter(|&t| t >= start && t <= horizon)
        .collect();
    if f.kind() == PieceKind::Linear {
        let n = ((horizon - start) * 4.0).ceil() as usize;
        knots.extend((0..n).map(|i| start + 0.25 * i as f64));
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let values = knots.iter().map(|&t| f.integral(t, t + 1.0)).collect::<Result<Vec<_>>>()?;
    let mut out = PiecewiseFunction::new(PieceKind::Linear, knots, values, start, horizon, f.tail_value())?;
    if f.kind() == PieceKind::Linear {
        out = out.mark_resampled();
    }
    Ok(out)
}

/// `(rE f)_n = int_n^{n+1} f`, evaluated directly on the representation.
pub fn restrict_window_avg(f: &PiecewiseFunction) -> Result<Vec<f64>> {
    let first = f.domain_start().ceil() as u64;
    let mut out = Vec::new();
    let mut n = first;
    while (n + 1) as f64 <= f.horizon() {
        out.push(f.integral(n as f64, (n + 1) as f64)?);
        n += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_maps() {
        assert_eq!(shift_discrete(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(dilate_discrete(&[1.0, 2.0, 3.0], 2).unwrap(), vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert!(shift_discrete(&[1.0], 0).is_err());
        assert!(dilate_discrete(&[1.0], 0).is_err());
        let k: Vec<f64> = (1..=50).map(|k| k as f64).collect();
        for (n, c) in cesaro_discrete(&k).into_iter().enumerate() {
            assert_eq!(c, (n as f64 + 2.0) / 2.0);
        }
    }

    #[test]
    fn embeddings_round_trip() {
        let x = [0.3, -1.0, 2.5, 0.0, 7.0];
        assert_eq!(restrict(&floor_embed(&x).unwrap()).unwrap(), x.to_vec());
        assert_eq!(restrict(&linear_embed(&x).unwrap()).unwrap(), x.to_vec());
        let pc = linear_embed(&[0.0, 1.0]).unwrap();
        assert_eq!(pc.eval(0.5).unwrap(), 0.5);
    }

    #[test]
    fn window_average_of_steps() {
        let x = [1.0, 4.0, -2.0, 3.0, 0.5];
        let p = floor_embed(&x).unwrap();
        let e = window_avg(&p).unwrap();
        for (n, v) in x.iter().enumerate().take(4) {
            assert_eq!(e.eval(n as f64).unwrap(), *v);
        }
        assert_eq!(e.eval(0.25).unwrap(), 0.75 * 1.0 + 0.25 * 4.0);
        assert_eq!(restrict_window_avg(&p).unwrap(), x.to_vec());
    }
}
