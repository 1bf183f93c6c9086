//! Shared numerical kernels: compensated summation, straight-line fits,
//! Gauss-Legendre quadrature, and the special functions the estimators need.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated running sum. Order of `add` calls fixes the result.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub max_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "line fit needs >= 2 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("line fit with degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    Ok(LineFit { intercept, slope, max_residual })
}

const GL_ORDER: usize = 20;

fn gauss_legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.push((x, w));
        }
        rule
    })
}

/// Fixed 20-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = CompensatedSum::new();
    for &(x, w) in gauss_legendre_rule() {
        acc.add(w * f(mid + half * x));
    }
    half * acc.value()
}

/// Adaptive bisection on top of the 20-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss_legendre(f, a, b);
    adapt(f, a, b, whole, rel_tol, abs_tol, 0)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, rel_tol: f64, abs_tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(f, a, m);
    let right = gauss_legendre(f, m, b);
    let both = left + right;
    if !both.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    // the second test stops at panels too narrow to resolve in floating point
    if (both - whole).abs() <= (rel_tol * both.abs()).max(abs_tol) || b - a <= 1e-9 * m.abs().max(1.0) {
        return Ok(both);
    }
    if depth >= 48 {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}] (estimate {both:e}, change {:e})",
            (both - whole).abs()
        )));
    }
    Ok(adapt(f, a, m, left, rel_tol, abs_tol * 0.5, depth + 1)?
        + adapt(f, m, b, right, rel_tol, abs_tol * 0.5, depth + 1)?)
}

/// Integral over `[a, inf)` for a decaying integrand, in doubling panels
/// starting at width `h0`. Stops after two consecutive negligible panels.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: &F, a: f64, h0: f64) -> Result<f64> {
    let mut total = CompensatedSum::new();
    let mut lo = a;
    let mut width = h0;
    let mut quiet = 0;
    for _ in 0..600 {
        let hi = lo + width;
        let piece = integrate(f, lo, hi, 1e-13, 1e-16 * total.value().abs())?;
        total.add(piece);
        let t = total.value().abs();
        if piece.abs() <= 1e-17 * t || (t == 0.0 && piece == 0.0 && lo > a + 64.0 * h0) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total.value());
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::Quadrature(format!("semi-infinite integral from {a} did not settle")))
}

const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation with
/// cut point `N = 16` and ten Bernoulli corrections.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::DivergentZeta(s));
    }
    const N: u32 = 16;
    let nf = N as f64;
    let mut acc = CompensatedSum::new();
    for n in 1..N {
        acc.add((n as f64).powf(-s));
    }
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * nf.powf(-s));
    // rising factorial s (s+1) ... (s+2j-2) / (2j)! times N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        if j > 0 {
            let k = 2 * j as u32;
            rising *= (s + k as f64 - 1.0) * (s + k as f64);
            fact *= (k + 1) as f64 * (k + 2) as f64;
            power /= nf * nf;
        }
        acc.add(b / fact * rising * power);
    }
    Ok(acc.value())
}

/// `H_k = sum_{n <= k} 1/n`, exact summation for small k and the
/// asymptotic expansion beyond.
pub fn harmonic_number(k: u64) -> f64 {
    if k <= 64 {
        return compensated_sum((1..=k).map(|n| 1.0 / n as f64));
    }
    let x = k as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2) - 1.0 / (252.0 * x2 * x2 * x2)
}

/// `theta(t) = sum_{k in Z} exp(-t k^2)`, switching to the Jacobi
/// transformed series for small `t`.
pub fn jacobi_theta(t: f64) -> f64 {
    assert!(t > 0.0, "theta needs t > 0");
    let direct = |q: f64| {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        let mut k = 1.0f64;
        loop {
            let term = (-q * k * k).exp();
            acc.add(2.0 * term);
            if term < 1e-20 {
                break;
            }
            k += 1.0;
        }
        acc.value()
    };
    if t >= 1.0 {
        direct(t)
    } else {
        let pi = std::f64::consts::PI;
        (pi / t).sqrt() * direct(pi * pi / t)
    }
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Volume of the unit sphere `S^{n-1}` for n = 1, 2, 3.
pub fn sphere_volume(n: u32) -> Result<f64> {
    use std::f64::consts::PI;
    match n {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::InvalidArgument(format!("dimension {n} not in 1..=3"))),
    }
}

/// Volume of the unit ball in dimension n = 1, 2, 3.
pub fn ball_volume(n: u32) -> Result<f64> {
    Ok(sphere_volume(n)? / n as f64)
}
