//! Ideal-membership predicates for `m_{1,inf}`, `u_{1,inf}`, weak `l^1` and
//! weak `l^p`. Asymptotic questions are answered from the tail model when
//! one is attached, otherwise from a regression over a trailing window of
//! the data; too little data gives `Undetermined`.

use serde::{Deserialize, Serialize};

use super::logavg::{default_z1_schedule, norm_1_inf, riesz_seminorm_proxy, zeta_norm_z1, ProxyPolicy};
use super::sequence::SingularSequence;
use crate::error::Result;
use crate::numerics::fit_line;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Member,
    NonMember,
    Undetermined,
}

impl Membership {
    pub fn and(self, other: Membership) -> Membership {
        use Membership::*;
        match (self, other) {
            (NonMember, _) | (_, NonMember) => NonMember,
            (Member, Member) => Member,
            _ => Undetermined,
        }
    }

    pub fn is_member(self) -> bool {
        self == Membership::Member
    }
}

/// How the asymptotic exponents `mu_n ~ C (ln n)^b n^{-a}` were obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AsymptoticBasis {
    FiniteSupport,
    TailModel { a: f64, b: f64 },
    Window { start: u64, end: u64, a: f64, b: Option<f64> },
    TooShort { length: usize, required: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakLpVerdict {
    pub p: f64,
    pub membership: Membership,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealMembershipReport {
    pub norm_1_inf: f64,
    pub in_m1inf: Membership,
    pub in_weak_l1: Membership,
    /// limsup n mu_n
    pub weak_l1_witness: f64,
    pub in_u1inf: Membership,
    /// limsup n mu_n / ln n
    pub u1inf_witness: f64,
    pub weak_lp: Vec<WeakLpVerdict>,
    pub riesz_proxy: f64,
    pub z1_norm: f64,
    pub basis: AsymptoticBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipPolicy {
    pub min_length: usize,
    /// The trailing window is `[len / window_ratio, len]`.
    pub window_ratio: u64,
    pub exponent_tol: f64,
    /// Log-exponents with `|b| <= log_exponent_exact` count as zero.
    pub log_exponent_exact: f64,
    pub log_exponent_tol: f64,
}

impl Default for MembershipPolicy {
    fn default() -> Self {
        Self {
            min_length: 1024,
            window_ratio: 16,
            exponent_tol: 0.02,
            log_exponent_exact: 0.02,
            log_exponent_tol: 0.25,
        }
    }
}

/// Class `{ mu_n = O or o( (ln n)^{b0} n^{-a0} ) }` tested against exponents.
#[derive(Clone, Copy)]
struct Boundary {
    a0: f64,
    b0: f64,
    /// O-class (b == b0 included) vs o-class (excluded).
    inclusive: bool,
}

impl Boundary {
    fn exact(self, a: f64, b: f64) -> Membership {
        if a > self.a0 {
            Membership::Member
        } else if a < self.a0 {
            Membership::NonMember
        } else if b < self.b0 || (b == self.b0 && self.inclusive) {
            Membership::Member
        } else {
            Membership::NonMember
        }
    }

    fn fitted(self, a: f64, b: Option<f64>, policy: &MembershipPolicy) -> Membership {
        if a > self.a0 + policy.exponent_tol {
            return Membership::Member;
        }
        if a < self.a0 - policy.exponent_tol {
            return Membership::NonMember;
        }
        let Some(b) = b else { return Membership::Undetermined };
        let d = b - self.b0;
        if d.abs() <= policy.log_exponent_exact {
            if self.inclusive {
                Membership::Member
            } else {
                Membership::Undetermined
            }
        } else if d < -policy.log_exponent_tol {
            Membership::Member
        } else if d > policy.log_exponent_tol {
            Membership::NonMember
        } else {
            Membership::Undetermined
        }
    }
}

const M1INF: Boundary = Boundary { a0: 1.0, b0: 0.0, inclusive: true };
const U1INF: Boundary = Boundary { a0: 1.0, b0: 1.0, inclusive: false };

fn weak_lp_boundary(p: f64) -> Boundary {
    Boundary { a0: 1.0 / p, b0: 0.0, inclusive: true }
}

/// limsup of `n^{a0} (ln n)^{-b0} C (ln n)^b n^{-a}` for an exact tail.
fn tail_witness(c: f64, a: f64, b: f64, a0: f64, b0: f64) -> f64 {
    if a > a0 || (a == a0 && b < b0) {
        0.0
    } else if a == a0 && b == b0 {
        c
    } else {
        f64::INFINITY
    }
}

pub fn ideal_membership(x: &SingularSequence, ps: &[f64], policy: &MembershipPolicy) -> Result<IdealMembershipReport> {
    let norm = norm_1_inf(x);
    let riesz_proxy = riesz_seminorm_proxy(x, &ProxyPolicy::default())?;
    let z1_norm = zeta_norm_z1(x, &default_z1_schedule())?.value;

    let decide = |boundary: Boundary, basis: &AsymptoticBasis| match *basis {
        AsymptoticBasis::FiniteSupport => Membership::Member,
        AsymptoticBasis::TailModel { a, b } => boundary.exact(a, b),
        AsymptoticBasis::Window { a, b, .. } => boundary.fitted(a, b, policy),
        AsymptoticBasis::TooShort { .. } => Membership::Undetermined,
    };

    let (basis, weak_l1_witness, u1inf_witness) = if x.is_finitely_supported() {
        (AsymptoticBasis::FiniteSupport, 0.0, 0.0)
    } else if let Some(t) = x.tail() {
        (
            AsymptoticBasis::TailModel { a: t.a, b: t.b },
            tail_witness(t.c, t.a, t.b, 1.0, 0.0),
            tail_witness(t.c, t.a, t.b, 1.0, 1.0),
        )
    } else if x.len() < policy.min_length {
        (AsymptoticBasis::TooShort { length: x.len(), required: policy.min_length }, f64::NAN, f64::NAN)
    } else {
        window_fit(x, policy)?
    };

    let in_m1inf = decide(M1INF, &basis);
    let in_weak_l1 = decide(weak_lp_boundary(1.0), &basis).and(in_m1inf);
    let in_u1inf = decide(U1INF, &basis).and(in_m1inf);
    let weak_lp = ps.iter().map(|&p| WeakLpVerdict { p, membership: decide(weak_lp_boundary(p), &basis) }).collect();

    Ok(IdealMembershipReport {
        norm_1_inf: norm,
        in_m1inf,
        in_weak_l1,
        weak_l1_witness,
        in_u1inf,
        u1inf_witness,
        weak_lp,
        riesz_proxy,
        z1_norm,
        basis,
    })
}

/// Fits `ln mu = c - a ln n` over the trailing window, then the log exponent
/// `b` from `ln(n^{a_round} mu_n)` against `ln ln n`, where `a_round` snaps
/// to the nearest integer or reciprocal-integer boundary within tolerance.
fn window_fit(x: &SingularSequence, policy: &MembershipPolicy) -> Result<(AsymptoticBasis, f64, f64)> {
    let len = x.len() as u64;
    let start = (len / policy.window_ratio).max(3);
    let samples = sample_indices(start, len, 64);
    let ln_n: Vec<f64> = samples.iter().map(|&n| (n as f64).ln()).collect();
    let ln_mu: Vec<f64> = samples.iter().map(|&n| x.values()[n as usize - 1].ln()).collect();
    let fit = fit_line(&ln_n, &ln_mu)?;
    let a = -fit.slope;

    let snapped = snap_exponent(a, policy.exponent_tol);
    let b = match snapped {
        Some(a0) => {
            let lnln: Vec<f64> = ln_n.iter().map(|l| l.ln()).collect();
            let w: Vec<f64> = ln_n.iter().zip(&ln_mu).map(|(l, m)| m + a0 * l).collect();
            Some(fit_line(&lnln, &w)?.slope)
        }
        None => None,
    };

    let mut weak = 0.0f64;
    let mut u = 0.0f64;
    for &n in &samples {
        let nf = n as f64;
        let v = x.values()[n as usize - 1];
        weak = weak.max(nf * v);
        u = u.max(nf * v / nf.ln());
    }
    Ok((AsymptoticBasis::Window { start, end: len, a, b }, weak, u))
}

fn snap_exponent(a: f64, tol: f64) -> Option<f64> {
    (1..=8).flat_map(|q| [q as f64, 1.0 / q as f64]).find(|c| (a - c).abs() <= tol)
}

fn sample_indices(start: u64, end: u64, count: usize) -> Vec<u64> {
    let (ls, le) = ((start as f64).ln(), (end as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (ls + (le - ls) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(start, end))
        .collect();
    out.dedup();
    out
}
