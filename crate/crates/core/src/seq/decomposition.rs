use num_complex::Complex64;

use super::sequence::SingularSequence;

/// `mu_k(T1) - mu_k(T2) + i mu_k(T3) - i mu_k(T4)`, shorter parts zero-padded.
pub fn tilde_mu(parts: [&SingularSequence; 4]) -> Vec<Complex64> {
    let len = parts.iter().map(|p| p.len()).max().unwrap_or(0);
    let at = |p: &SingularSequence, k: usize| p.values().get(k).copied().unwrap_or(0.0);
    (0..len).map(|k| Complex64::new(at(parts[0], k) - at(parts[1], k), at(parts[2], k) - at(parts[3], k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_part_passes_through() {
        let t1 = SingularSequence::new(vec![3.0, 2.0, 0.5]).unwrap();
        let z = SingularSequence::empty();
        let m = tilde_mu([&t1, &z, &z, &z]);
        assert_eq!(m, vec![Complex64::new(3.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)]);
    }

    #[test]
    fn cancelling_parts_vanish() {
        let a = SingularSequence::new(vec![1.0, 0.7]).unwrap();
        let b = SingularSequence::new(vec![0.4]).unwrap();
        let m = tilde_mu([&a, &a, &b, &b]);
        assert!(m.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}
