use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::estimators::{dixmier_estimate, zeta_residue_estimate, TraceEstimate};
use super::source::SpectralSource;
use crate::error::{Error, Result};
use crate::models::{lattice_zeta, FourierMultiplier, LatticeModel};
use crate::numerics::{gamma, jacobi_theta, riemann_zeta, CompensatedSum};
use crate::seq::{dyadic_checkpoints, SingularSequence};
use crate::trend::{TrendPolicy, TrendStatus};

/// Bounded operator `A` paired with a model `T` in `Tr(A T^s)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProductOperand {
    /// Multiplication by a trigonometric polynomial on the torus.
    Multiplier(FourierMultiplier),
    /// Projection onto the Fourier modes in `stride * Z^n`.
    Sublattice { stride: u32 },
    /// Diagonal weights in the eigenbasis of `T`, continued by `tail_weight`.
    DiagonalWeights { weights: Vec<f64>, tail_weight: f64 },
}

pub enum ProductModel<'a> {
    Lattice(&'a LatticeModel),
    Sequence(&'a SingularSequence),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductZetaSequence {
    /// `(k, (1/k) Tr(A T^{1+1/k}))`.
    pub values: Vec<(u64, Complex64)>,
    pub residue: Option<Complex64>,
    pub estimate: TraceEstimate,
}

/// Scalar source whose zeta is `Tr(A T^s)` for real diagonal `A`.
struct WeightedSequence<'a> {
    weights: &'a [f64],
    tail_weight: f64,
    base: &'a SingularSequence,
}

impl SpectralSource for WeightedSequence<'_> {
    fn label(&self) -> String {
        format!("weighted {}", self.base.label())
    }
    fn horizon(&self) -> u64 {
        0
    }
    fn is_finitely_supported(&self) -> bool {
        self.base.is_finitely_supported()
    }
    fn partial_sums(&self, _ks: &[u64]) -> Result<Vec<f64>> {
        Err(Error::InvalidArgument("weighted products only support zeta evaluation".into()))
    }
    fn zeta(&self, s: f64) -> Result<crate::seq::ZetaValue> {
        let total = self.base.zeta(s)?;
        let mut head = CompensatedSum::new();
        let mut weighted = CompensatedSum::new();
        for (w, &mu) in self.weights.iter().zip(self.base.values()) {
            let p = if mu == 0.0 { 0.0 } else { mu.powf(s) };
            head.add(p);
            weighted.add(w * p);
        }
        let rest = total.value - head.value();
        Ok(crate::seq::ZetaValue { value: weighted.value() + self.tail_weight * rest, tail: total.tail })
    }
    fn heat_sum(&self, _t: f64, _alpha: f64) -> Result<f64> {
        Err(Error::InvalidArgument("weighted products only support zeta evaluation".into()))
    }
}

/// `(1/k) Tr(A T^{1+1/k})` over `ks` for pairs with an exact diagonal formula.
pub fn product_zeta_sequence(
    a: &ProductOperand,
    t: ProductModel<'_>,
    ks: &[u64],
    policy: &TrendPolicy,
) -> Result<ProductZetaSequence> {
    let (factor, estimate) = match (a, t) {
        (ProductOperand::Multiplier(f), ProductModel::Lattice(m)) => {
            if f.dimension() != m.dimension() {
                return Err(Error::InvalidArgument(format!(
                    "multiplier dimension {} differs from torus dimension {}",
                    f.dimension(),
                    m.dimension()
                )));
            }
            (f.zero_mode(), zeta_residue_estimate(m, ks, policy)?)
        }
        (ProductOperand::Sublattice { stride }, ProductModel::Lattice(m)) => {
            let sub = LatticeModel::with_options(m.dimension(), m.power(), m.cutoff(), m.stride() * stride)?;
            (Complex64::new(1.0, 0.0), zeta_residue_estimate(&sub, ks, policy)?)
        }
        (ProductOperand::DiagonalWeights { weights, tail_weight }, ProductModel::Sequence(x)) => {
            if weights.len() > x.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} weights for a sequence of length {}",
                    weights.len(),
                    x.len()
                )));
            }
            let w = WeightedSequence { weights, tail_weight: *tail_weight, base: x };
            (Complex64::new(1.0, 0.0), zeta_residue_estimate(&w, ks, policy)?)
        }
        (ProductOperand::Multiplier(_), ProductModel::Sequence(_)) => {
            return Err(Error::NoExactProductTrace("a multiplier against a bare singular sequence".into()))
        }
        (ProductOperand::Sublattice { .. }, ProductModel::Sequence(_)) => {
            return Err(Error::NoExactProductTrace("a sublattice projection against a bare singular sequence".into()))
        }
        (ProductOperand::DiagonalWeights { .. }, ProductModel::Lattice(_)) => {
            return Err(Error::NoExactProductTrace("diagonal weights against a lattice model".into()))
        }
    };
    let values = estimate.raw_series.iter().map(|&(k, v)| (k as u64, factor * v)).collect();
    let residue = estimate.value.map(|v| factor * v);
    Ok(ProductZetaSequence { values, residue, estimate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub holds: bool,
    /// `rhs - lhs` on the extrapolated values when all converged, otherwise
    /// the smallest checkpoint slack.
    pub slack: f64,
    pub status: TrendStatus,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

/// Relative allowance for rounding in the powered spectra.
const HOLDER_ALLOWANCE: f64 = 1e-9;

/// `rho(|TV|) <= rho(|T|^p)^{1/p} rho(|V|^q)^{1/q}` for simultaneously
/// diagonal positive `T`, `V` of equal length, checked at every dyadic
/// checkpoint and on the extrapolated limits.
pub fn holder_check(t: &SingularSequence, v: &SingularSequence, p: f64, policy: &TrendPolicy) -> Result<HolderCheck> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("Holder exponent must exceed 1, got {p}")));
    }
    if t.len() != v.len() {
        return Err(Error::GridMismatch { expected: t.len(), got: v.len() });
    }
    let q = p / (p - 1.0);
    let tv = SingularSequence::new(t.values().iter().zip(v.values()).map(|(a, b)| a * b).collect())?;
    let tp = SingularSequence::new(t.values().iter().map(|a| a.powf(p)).collect())?;
    let vq = SingularSequence::new(v.values().iter().map(|b| b.powf(q)).collect())?;
    let ks: Vec<u64> = dyadic_checkpoints(t.len() as u64).into_iter().filter(|&k| k >= 2).collect();
    let l = dixmier_estimate(&tv, &ks, true, policy)?;
    let a = dixmier_estimate(&tp, &ks, true, policy)?;
    let b = dixmier_estimate(&vq, &ks, true, policy)?;
    let mut holds = true;
    let mut slack = f64::INFINITY;
    for ((x, y), z) in l.raw_series.iter().zip(&a.raw_series).zip(&b.raw_series) {
        let rhs = y.1.powf(1.0 / p) * z.1.powf(1.0 / q);
        holds &= x.1 <= rhs * (1.0 + HOLDER_ALLOWANCE);
        slack = slack.min(rhs - x.1);
    }
    let converged = [&l, &a, &b].iter().all(|e| e.status == TrendStatus::Converged);
    let undetermined = [&l, &a, &b].iter().any(|e| e.status == TrendStatus::Undetermined);
    let (lhs, rhs) = if converged {
        let lhs = l.value.expect("converged");
        let rhs = a.value.expect("converged").powf(1.0 / p) * b.value.expect("converged").powf(1.0 / q);
        let allowance = l.error_estimate + a.error_estimate + b.error_estimate;
        holds &= lhs <= rhs * (1.0 + HOLDER_ALLOWANCE) + allowance;
        slack = rhs - lhs;
        (Some(lhs), Some(rhs))
    } else {
        (None, None)
    };
    let status = if converged {
        TrendStatus::Converged
    } else if undetermined {
        TrendStatus::Undetermined
    } else {
        TrendStatus::Oscillating
    };
    Ok(HolderCheck { holds, slack, status, lhs, rhs })
}

/// Positive operator `Q` with known eigenvalues for the Mellin identity
/// `Gamma(s) zeta_Q(s) = int_0^inf t^{s-1} Tr(exp(-tQ)) dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MellinModel {
    Eigenvalues {
        values: Vec<f64>,
    },
    /// `lambda_n = n^2`, `n >= 1`.
    IntegerSquares,
    /// `lambda_m = 1 + |m|^2` on `Z^n`.
    Torus {
        n: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinCheck {
    pub passes: bool,
    pub relative_error: f64,
    pub integral: f64,
    pub reference: f64,
    pub status: TrendStatus,
}

const MELLIN_TOLERANCE: f64 = 1e-6;
const MELLIN_U_MIN: f64 = -60.0;
const MELLIN_U_MAX: f64 = 6.0;
/// Lattice cutoff for the torus reference sum (tail corrected).
const MELLIN_TORUS_CUTOFF: f64 = 400.0;

impl MellinModel {
    fn heat_trace(&self, t: f64) -> f64 {
        match self {
            MellinModel::Eigenvalues { values } => {
                CompensatedSum::from_iter(values.iter().map(|l| (-t * l).exp())).value()
            }
            MellinModel::IntegerSquares => 0.5 * (jacobi_theta(t) - 1.0),
            MellinModel::Torus { n } => (-t).exp() * jacobi_theta(t).powi(*n as i32),
        }
    }

    fn zeta(&self, s: f64) -> Result<f64> {
        match self {
            MellinModel::Eigenvalues { values } => {
                if let Some(l) = values.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                    return Err(Error::InvalidArgument(format!("eigenvalue {l} is not positive")));
                }
                Ok(CompensatedSum::from_iter(values.iter().map(|l| l.powf(-s))).value())
            }
            MellinModel::IntegerSquares => riemann_zeta(2.0 * s),
            MellinModel::Torus { n } => Ok(lattice_zeta(*n, 2.0 * s / *n as f64, MELLIN_TORUS_CUTOFF)?.value),
        }
    }
}

/// Trapezoid rule in `u = ln t` over `[-60, 6]` at spacing `1/32`, compared
/// with spacing `1/16`.
pub fn mellin_check(model: &MellinModel, s: f64) -> Result<MellinCheck> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("Mellin variable must be positive, got {s}")));
    }
    let reference = gamma(s) * model.zeta(s)?;
    let trapezoid = |h: f64| {
        let n = ((MELLIN_U_MAX - MELLIN_U_MIN) / h).round() as usize;
        let mut acc = CompensatedSum::new();
        for i in 0..=n {
            let u = MELLIN_U_MIN + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc.add(w * (s * u).exp() * model.heat_trace(u.exp()));
        }
        h * acc.value()
    };
    let fine = trapezoid(1.0 / 32.0);
    let coarse = trapezoid(1.0 / 16.0);
    let relative_error = (fine - reference).abs() / reference.abs();
    let resolved = (fine - coarse).abs() <= 0.1 * MELLIN_TOLERANCE * fine.abs();
    Ok(MellinCheck {
        passes: resolved && relative_error <= MELLIN_TOLERANCE,
        relative_error,
        integral: fine,
        reference,
        status: if resolved { TrendStatus::Converged } else { TrendStatus::Undetermined },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::estimators::zeta_schedule;
    use crate::estimate::source::AnalyticSequence;
    use std::f64::consts::PI;

    fn policy() -> TrendPolicy {
        TrendPolicy::default()
    }

    #[test]
    fn product_residues_on_the_torus() {
        let m = LatticeModel::new(2, 400.0).unwrap();
        let ks = zeta_schedule(200, 20);
        let one = FourierMultiplier::constant(2, 1.0).unwrap();
        let r =
            product_zeta_sequence(&ProductOperand::Multiplier(one), ProductModel::Lattice(&m), &ks, &policy()).unwrap();
        assert!((r.residue.unwrap().re - PI).abs() < 1e-3 * PI);
        let f = FourierMultiplier::new(
            2,
            vec![
                (vec![0, 0], Complex64::new(2.0, 0.0)),
                (vec![1, 0], Complex64::new(0.5, 0.0)),
                (vec![-1, 0], Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let r =
            product_zeta_sequence(&ProductOperand::Multiplier(f), ProductModel::Lattice(&m), &ks, &policy()).unwrap();
        assert!((r.residue.unwrap().re - 2.0 * PI).abs() < 2e-3 * PI);
        let r =
            product_zeta_sequence(&ProductOperand::Sublattice { stride: 2 }, ProductModel::Lattice(&m), &ks, &policy())
                .unwrap();
        assert!((r.residue.unwrap().re - PI / 4.0).abs() < 1e-3 * PI / 4.0);
    }

    #[test]
    fn product_without_formula_is_rejected() {
        let x = SingularSequence::new(vec![1.0, 0.5]).unwrap();
        let one = FourierMultiplier::constant(2, 1.0).unwrap();
        let e = product_zeta_sequence(&ProductOperand::Multiplier(one), ProductModel::Sequence(&x), &[1, 2], &policy());
        assert!(matches!(e, Err(Error::NoExactProductTrace(_))));
    }

    #[test]
    fn diagonal_weights_scale_the_residue() {
        let x = AnalyticSequence::PowerLog { c: 1.0, a: 1.0, b: 0.0 }.materialize(1000).unwrap();
        let x = SingularSequence::with_tail(x.into_values(), crate::seq::PowerLogTail::new(1.0, 1.0, 0.0).unwrap())
            .unwrap();
        let op = ProductOperand::DiagonalWeights { weights: vec![5.0; 10], tail_weight: 0.5 };
        let r = product_zeta_sequence(&op, ProductModel::Sequence(&x), &zeta_schedule(200, 20), &policy()).unwrap();
        assert!((r.residue.unwrap().re - 0.5).abs() < 1e-3);
    }

    #[test]
    fn holder_equality_and_strict_cases() {
        let n = 1 << 20;
        let h: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
        let root = SingularSequence::new(h.iter().map(|v| v.sqrt()).collect()).unwrap();
        let c = holder_check(&root, &root, 2.0, &policy()).unwrap();
        assert!(c.holds);
        assert_eq!(c.status, TrendStatus::Converged);
        assert!(c.slack.abs() < 1e-6);
        let osc = AnalyticSequence::Oscillator { scale: 1.0 }.materialize(n).unwrap();
        let t = SingularSequence::new(osc.values().iter().map(|v| v.sqrt()).collect()).unwrap();
        let c = holder_check(&t, &root, 2.0, &policy()).unwrap();
        assert!(c.holds);
        assert!(c.slack >= 0.0);
    }

    #[test]
    fn mellin_instances() {
        let one = mellin_check(&MellinModel::Eigenvalues { values: vec![1.0] }, 2.0).unwrap();
        assert!(one.passes, "{one:?}");
        let sq = mellin_check(&MellinModel::IntegerSquares, 1.0).unwrap();
        assert!((sq.reference - PI * PI / 6.0).abs() < 1e-14);
        assert!(sq.passes, "{sq:?}");
        let torus = mellin_check(&MellinModel::Torus { n: 2 }, 2.0).unwrap();
        assert!(torus.passes, "{torus:?}");
    }
}
