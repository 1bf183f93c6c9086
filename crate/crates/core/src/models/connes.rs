use num_complex::Complex64;

use super::matrix::FourierMultiplier;
use crate::error::{Error, Result};
use crate::numerics::sphere_volume;

/// `Vol(S^{n-1}) / (n (2 pi)^n) * int_{[0, 2 pi)^n} f = Vol(S^{n-1}) f^(0) / n`.
pub fn connes_rhs(f: &FourierMultiplier) -> Result<Complex64> {
    let n = f.dimension();
    Ok(f.zero_mode() * (sphere_volume(n)? / n as f64))
}

/// Pointwise domination `|h_m(x)|^2 <= |h(x)|^2` at every grid point for
/// every profile.
pub fn domination_check(profiles: &[Vec<f64>], candidate: &[f64]) -> Result<bool> {
    for p in profiles {
        if p.len() != candidate.len() {
            return Err(Error::GridMismatch { expected: candidate.len(), got: p.len() });
        }
    }
    if let Some(v) = profiles.iter().flatten().chain(candidate).find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("profiles must be nonnegative, found {v}")));
    }
    Ok(profiles.iter().all(|p| p.iter().zip(candidate).all(|(a, b)| a <= b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rhs_values() {
        let one2 = FourierMultiplier::constant(2, 1.0).unwrap();
        assert_eq!(connes_rhs(&one2).unwrap(), Complex64::new(PI, 0.0));
        let one1 = FourierMultiplier::constant(1, 1.0).unwrap();
        assert_eq!(connes_rhs(&one1).unwrap(), Complex64::new(2.0, 0.0));
        let mean_free = FourierMultiplier::new(1, vec![(vec![1], Complex64::new(0.5, 0.0))]).unwrap();
        assert_eq!(connes_rhs(&mean_free).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn domination_examples() {
        let grid = 64;
        let ones = vec![1.0; grid];
        let exponentials: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0; grid]).collect();
        assert!(domination_check(&exponentials, &ones).unwrap());
        // spikes of height m on a support of width grid/m
        let spikes: Vec<Vec<f64>> =
            (1..=16usize).map(|m| (0..grid).map(|i| if i < grid / m { m as f64 } else { 0.0 }).collect()).collect();
        let bounded = vec![4.0; grid];
        assert!(!domination_check(&spikes, &bounded).unwrap());
        assert!(domination_check(&spikes[..4], &bounded).unwrap());
        assert!(domination_check(std::slice::from_ref(&bounded), &bounded).unwrap());
        assert!(matches!(domination_check(&[vec![1.0; 3]], &ones), Err(Error::GridMismatch { .. })));
    }
}
