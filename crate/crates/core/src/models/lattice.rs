use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ball_volume, integrate, integrate_to_infinity, sphere_volume, CompensatedSum};
use crate::seq::{PowerLogTail, SingularSequence, ZetaValue};

/// Matrix and spectrum memory cap when nothing else is configured.
pub const DEFAULT_BUDGET_MB: u64 = 4096;

const CHUNK: usize = 4096;

/// Spectrum `(1 + |m|^2)^(-power)` over lattice points `m` of
/// `stride * Z^n` with `|m| <= cutoff`, stored as shells `(|m|^2, count)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel {
    dimension: u32,
    power: f64,
    cutoff: f64,
    stride: u32,
    shells: Vec<(u64, u64)>,
    count: u64,
}

impl LatticeModel {
    pub fn new(dimension: u32, cutoff: f64) -> Result<Self> {
        Self::with_options(dimension, dimension as f64 / 2.0, cutoff, 1)
    }

    pub fn with_options(dimension: u32, power: f64, cutoff: f64, stride: u32) -> Result<Self> {
        sphere_volume(dimension)?;
        if !(cutoff >= 1.0 && cutoff.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff radius must be >= 1, got {cutoff}")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::InvalidArgument(format!("operator power must be positive, got {power}")));
        }
        if stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        let shells = enumerate_shells(dimension, cutoff, stride)?;
        let count = shells.iter().map(|s| s.1).sum();
        Ok(Self { dimension, power, cutoff, stride, shells, count })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    /// Number of enumerated lattice points.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn shells(&self) -> &[(u64, u64)] {
        &self.shells
    }

    pub fn eigenvalue(&self, r2: u64) -> f64 {
        (1.0 + r2 as f64).powf(-self.power)
    }

    /// Lattice points per unit volume.
    fn density(&self) -> f64 {
        (self.stride as f64).powi(-(self.dimension as i32))
    }

    /// Radius of the ball whose volume times the density equals the point
    /// count; tail integrals start there.
    pub fn effective_radius(&self) -> f64 {
        let v = ball_volume(self.dimension).expect("dimension checked");
        (self.count as f64 / (v * self.density())).powf(1.0 / self.dimension as f64)
    }

    /// `mu_N ~ c N^-a` from inverting the ball-volume count.
    pub fn tail_model(&self) -> PowerLogTail {
        let n = self.dimension as f64;
        let v = ball_volume(self.dimension).expect("dimension checked") * self.density();
        PowerLogTail { c: v.powf(2.0 * self.power / n), a: 2.0 * self.power / n, b: 0.0 }
    }

    pub fn spectrum_bytes(&self) -> u64 {
        self.count * std::mem::size_of::<f64>() as u64
    }

    /// Materialized nonincreasing spectrum with the asymptotic tail attached.
    pub fn spectrum(&self, budget_mb: u64) -> Result<SingularSequence> {
        check_budget(self.spectrum_bytes(), budget_mb)?;
        let mut values = Vec::with_capacity(self.count as usize);
        for &(r2, c) in &self.shells {
            let mu = self.eigenvalue(r2);
            values.extend(std::iter::repeat_n(mu, c as usize));
        }
        SingularSequence::with_tail(values, self.tail_model())
    }

    /// `sum_{n <= k} mu_n` at increasing `ks`; past the enumerated points
    /// the radial tail integral is used.
    pub fn partial_sums(&self, ks: &[u64]) -> Result<Vec<f64>> {
        crate::seq::check_checkpoints(ks)?;
        let mut out = Vec::with_capacity(ks.len());
        let mut acc = CompensatedSum::new();
        let mut shell = 0usize;
        let mut used = 0u64;
        for &k in ks {
            while shell < self.shells.len() && used + self.shells[shell].1 <= k {
                let (r2, c) = self.shells[shell];
                acc.add(c as f64 * self.eigenvalue(r2));
                used += c;
                shell += 1;
            }
            if k <= self.count {
                let partial = if shell < self.shells.len() {
                    (k - used) as f64 * self.eigenvalue(self.shells[shell].0)
                } else {
                    0.0
                };
                out.push(acc.value() + partial);
            } else {
                let r1 = (k as f64 / (ball_volume(self.dimension)? * self.density())).powf(1.0 / self.dimension as f64);
                let extra = self.radial_integral(self.power, self.effective_radius(), r1)?;
                out.push(acc.value() + extra);
            }
        }
        Ok(out)
    }

    /// `density * |S^{n-1}| int_{r0}^{r1} r^{n-1} (1 + r^2)^(-q) dr`.
    fn radial_integral(&self, q: f64, r0: f64, r1: f64) -> Result<f64> {
        let n = self.dimension as i32;
        let f = |r: f64| r.powi(n - 1) * (1.0 + r * r).powf(-q);
        let core = integrate(&f, r0, r1, 1e-13, 0.0)?;
        Ok(self.density() * sphere_volume(self.dimension)? * core)
    }

    /// Explicit shell sum of `g(|m|^2)`, reduced in fixed-size chunks so the
    /// result does not depend on the thread count.
    fn shell_sum<G: Fn(u64) -> f64 + Sync>(&self, g: G) -> f64 {
        let partial: Vec<f64> = self
            .shells
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = CompensatedSum::new();
                for &(r2, c) in chunk {
                    acc.add(c as f64 * g(r2));
                }
                acc.value()
            })
            .collect();
        let mut acc = CompensatedSum::new();
        for p in partial {
            acc.add(p);
        }
        acc.value()
    }

    /// `sum_m mu_m^s` with the tail beyond the effective radius integrated
    /// in closed form.
    pub fn zeta(&self, s: f64) -> Result<ZetaValue> {
        let q = self.power * s;
        if !(2.0 * q > self.dimension as f64) {
            return Err(Error::DivergentZeta(s));
        }
        let head = self.shell_sum(|r2| (1.0 + r2 as f64).powf(-q));
        let tail = self.density()
            * sphere_volume(self.dimension)?
            * radial_power_tail(self.dimension, q, self.effective_radius())?;
        Ok(ZetaValue { value: head + tail, tail })
    }

    /// `sum_m exp(-(t mu_m)^(-alpha))` with the radial tail integrated.
    pub fn heat_sum(&self, t: f64, alpha: f64) -> Result<f64> {
        if !(t > 0.0 && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "heat trace needs t > 0 and alpha > 0 (t = {t}, alpha = {alpha})"
            )));
        }
        let pa = self.power * alpha;
        let ta = t.powf(-alpha);
        let term = move |r2: f64| (-(1.0 + r2).powf(pa) * ta).exp();
        let head = self.shell_sum(|r2| term(r2 as f64));
        let n = self.dimension as i32;
        let r0 = self.effective_radius();
        let f = move |r: f64| r.powi(n - 1) * term(r * r);
        let scale = t.powf(1.0 / (2.0 * self.power)).max(1.0);
        let tail = if term(r0 * r0) == 0.0 {
            0.0
        } else {
            self.density() * sphere_volume(self.dimension)? * integrate_to_infinity(&f, r0, 0.25 * scale)?
        };
        Ok(head + tail)
    }
}

pub(crate) fn check_budget(bytes: u64, budget_mb: u64) -> Result<()> {
    let required_mb = bytes.div_ceil(1 << 20);
    if required_mb > budget_mb {
        return Err(Error::Budget { required_mb, budget_mb });
    }
    Ok(())
}

/// Memory allowed for the dense `|m|^2` histogram behind the shell list.
const SHELL_TABLE_MB: u64 = DEFAULT_BUDGET_MB;

fn enumerate_shells(dimension: u32, cutoff: f64, stride: u32) -> Result<Vec<(u64, u64)>> {
    let s = stride as i64;
    let jmax = (cutoff / stride as f64).floor() as i64;
    let r2max = (cutoff * cutoff).floor() as u64;
    // multiplicity of a coordinate j >= 0 among +-j
    let mult = |j: i64| if j == 0 { 1u64 } else { 2 };
    let sq = |j: i64| ((j * s) * (j * s)) as u64;
    if dimension == 1 {
        return Ok((0..=jmax).map(|j| (sq(j), mult(j))).collect());
    }
    check_budget(r2max.saturating_add(1).saturating_mul(8), SHELL_TABLE_MB)?;
    let mut counts = vec![0u64; r2max as usize + 1];
    match dimension {
        2 => {
            for x in 0..=jmax {
                let rx = sq(x);
                for y in 0..=jmax {
                    let r = rx + sq(y);
                    if r > r2max {
                        break;
                    }
                    counts[r as usize] += mult(x) * mult(y);
                }
            }
        }
        _ => {
            for x in 0..=jmax {
                let rx = sq(x);
                for y in 0..=jmax {
                    let rxy = rx + sq(y);
                    if rxy > r2max {
                        break;
                    }
                    for z in 0..=jmax {
                        let r = rxy + sq(z);
                        if r > r2max {
                            break;
                        }
                        counts[r as usize] += mult(x) * mult(y) * mult(z);
                    }
                }
            }
        }
    }
    Ok(counts.into_iter().enumerate().filter(|&(_, c)| c > 0).map(|(r2, c)| (r2 as u64, c)).collect())
}

/// `int_{r0}^inf r^{n-1} (1 + r^2)^{-q} dr`, `2q > n`, by the binomial
/// series in `r^-2` (from radius 2 on) plus quadrature below radius 2.
fn radial_power_tail(dimension: u32, q: f64, r0: f64) -> Result<f64> {
    let n = dimension as f64;
    let nd = dimension as i32;
    let split = r0.max(2.0);
    let mut head = 0.0;
    if r0 < split {
        head = integrate(&|r: f64| r.powi(nd - 1) * (1.0 + r * r).powf(-q), r0, split, 1e-14, 0.0)?;
    }
    // r^{n-1}(1+r^2)^{-q} = sum_j binom(-q, j) r^{n-1-2q-2j}
    let mut acc = CompensatedSum::new();
    let mut coeff = 1.0;
    let inv2 = split.powi(-2);
    let mut rpow = split.powf(n - 2.0 * q);
    for j in 0..400 {
        let jf = j as f64;
        let term = coeff * rpow / (2.0 * q + 2.0 * jf - n);
        acc.add(term);
        if term.abs() <= 1e-18 * acc.value().abs() {
            return Ok(head + acc.value());
        }
        coeff *= -(q + jf) / (jf + 1.0);
        rpow *= inv2;
    }
    Err(Error::Quadrature(format!("radial tail series did not converge (q = {q}, r0 = {r0})")))
}

/// Nonincreasing torus spectrum `(1 + |m|^2)^(-n/2)`, `|m| <= cutoff`.
pub fn torus_spectrum(n: u32, cutoff: f64, budget_mb: u64) -> Result<SingularSequence> {
    LatticeModel::new(n, cutoff)?.spectrum(budget_mb)
}

/// `sum_m (1 + |m|^2)^(-n s / 2)` with the radial tail correction.
pub fn lattice_zeta(n: u32, s: f64, cutoff: f64) -> Result<ZetaValue> {
    if !(s > 1.0) {
        return Err(Error::DivergentZeta(s));
    }
    LatticeModel::new(n, cutoff)?.zeta(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_cutoff_one() {
        let x = torus_spectrum(1, 1.0, 64).unwrap();
        let h = 0.5f64.sqrt();
        assert_eq!(x.values(), &[1.0, h, h]);
    }

    #[test]
    fn circle_count_matches_brute_force() {
        let m = LatticeModel::new(2, 50.0).unwrap();
        let mut brute = 0u64;
        for x in -50i64..=50 {
            for y in -50i64..=50 {
                if x * x + y * y <= 2500 {
                    brute += 1;
                }
            }
        }
        assert_eq!(m.count(), brute);
        let spec = m.spectrum(64).unwrap();
        assert_eq!(spec.len() as u64, brute);
        assert_eq!(spec.values()[0], 1.0);
    }

    #[test]
    fn shell_multiplicities_match_orbits() {
        let m = LatticeModel::new(2, 10.0).unwrap();
        let shell = |r2| m.shells().iter().find(|s| s.0 == r2).unwrap().1;
        assert_eq!(shell(0), 1);
        assert_eq!(shell(1), 4);
        assert_eq!(shell(2), 4);
        assert_eq!(shell(25), 12); // (+-5,0),(0,+-5),(+-3,+-4),(+-4,+-3)
        let m3 = LatticeModel::new(3, 3.0).unwrap();
        assert_eq!(m3.shells()[1], (1, 6));
        assert_eq!(m3.shells()[2], (2, 12));
    }

    #[test]
    fn zeta_s2_matches_brute_force() {
        let cutoff = 60.0;
        let m = LatticeModel::new(2, cutoff).unwrap();
        let z = m.zeta(2.0).unwrap();
        let mut brute = CompensatedSum::new();
        for x in -60i64..=60 {
            for y in -60i64..=60 {
                let r2 = (x * x + y * y) as f64;
                if r2 <= cutoff * cutoff {
                    brute.add((1.0 + r2).powi(-2));
                }
            }
        }
        assert!((z.value - z.tail - brute.value()).abs() < 1e-10);
        // tail of (1+r^2)^-2 over |x| > R_eff in the plane: pi / (1 + R_eff^2)
        let r = m.effective_radius();
        assert!((z.tail - PI / (1.0 + r * r)).abs() < 1e-13);
    }

    #[test]
    fn zeta_is_decreasing_in_s() {
        for n in 1..=3 {
            let m = LatticeModel::new(n, 20.0).unwrap();
            let a = m.zeta(1.5).unwrap().value;
            let b = m.zeta(2.0).unwrap().value;
            let c = m.zeta(3.0).unwrap().value;
            assert!(a > b && b > c, "n = {n}");
        }
        assert!(lattice_zeta(2, 1.0, 10.0).is_err());
    }

    #[test]
    fn radial_series_matches_quadrature() {
        for (n, q, r0) in [(1u32, 0.8, 3.0), (2, 1.2, 1.0), (3, 2.1, 5.5)] {
            let nd = n as i32;
            let f = |r: f64| r.powi(nd - 1) * (1.0 + r * r).powf(-q);
            let quad =
                integrate(&f, r0, 1e4, 1e-13, 0.0).unwrap() + (1e4f64).powf(n as f64 - 2.0 * q) / (2.0 * q - n as f64);
            let series = radial_power_tail(n, q, r0).unwrap();
            assert!((series - quad).abs() < 1e-7 * series, "{n} {q} {series} {quad}");
        }
    }

    #[test]
    fn partial_sums_and_budget() {
        let m = LatticeModel::new(2, 30.0).unwrap();
        let x = m.spectrum(64).unwrap();
        let ks = [1, 5, 100, 2000, m.count()];
        let direct = x.partial_sums(&ks).unwrap();
        let shells = m.partial_sums(&ks).unwrap();
        for (a, b) in direct.iter().zip(&shells) {
            assert!((a - b).abs() < 1e-12 * a);
        }
        assert!(matches!(LatticeModel::new(2, 2000.0).unwrap().spectrum(1), Err(Error::Budget { .. })));
    }

    #[test]
    fn even_sublattice_density() {
        let m = LatticeModel::with_options(2, 1.0, 100.0, 2).unwrap();
        assert!(m.shells().iter().all(|s| s.0 % 4 == 0));
        let full = LatticeModel::new(2, 50.0).unwrap();
        assert_eq!(m.count(), full.count());
    }

    #[test]
    fn heat_tail_for_the_plane() {
        // sum_m e^{-(1+|m|^2)/t} = e^{-1/t} theta(1/t)^2
        let m = LatticeModel::new(2, 40.0).unwrap();
        let t: f64 = 2000.0;
        let exact = (-1.0 / t).exp() * crate::numerics::jacobi_theta(1.0 / t).powi(2);
        let got = m.heat_sum(t, 1.0).unwrap();
        assert!((got - exact).abs() < 1e-3 * exact, "{got} {exact}");
    }
}
