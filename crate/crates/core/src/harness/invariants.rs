//! Property checks run by `--check`, each fed from its own ChaCha stream of
//! the run seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::{
    dixmier_estimate, dyadic_schedule, geometric_times, heat_estimate, zeta_residue_estimate, AnalyticSequence,
    Smoothing,
};
use crate::maps::{commutator_defect, floor_embed, DefectInput, MapPair};
use crate::models::{hermitian_decompose, nc_product, nc_star, nc_tau0, singular_values, NCTorusElement};
use crate::seq::{log_average, norm_1_inf, submajorizes, SingularSequence};
use crate::trend::{TrendPolicy, TrendStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub results: Vec<InvariantResult>,
}

impl InvariantSummary {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Stream `index` of the counter-based generator keyed by `seed`.
pub fn rng_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random nonincreasing nonnegative sequence with a zero stretch at the end.
pub fn random_sequence(rng: &mut impl Rng, len: usize) -> SingularSequence {
    let mut v: Vec<f64> = (0..len).map(|i| if i + len / 10 >= len { 0.0 } else { rng.gen::<f64>() }).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    SingularSequence::new(v).expect("sorted nonnegative")
}

pub fn random_complex_matrix(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    random_complex_matrix(rng, n).qr().q()
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 9] = [
    ("positivity", positivity),
    ("homogeneity", homogeneity),
    ("singularity", singularity),
    ("alpha_monotonicity", monotonicity),
    ("harmonic_submajorization", harmonic_submajorization),
    ("nc_torus_trace", nc_torus_trace),
    ("shift_defects_exact", shift_defects),
    ("unitary_invariance", unitary_invariance),
    ("hermitian_reconstruction", hermitian_reconstruction),
];

pub fn run_invariant_suite(seed: u64) -> InvariantSummary {
    let results = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = rng_stream(seed, i as u64);
            let (passed, detail) = match check(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            InvariantResult { name: (*name).into(), passed, detail }
        })
        .collect();
    InvariantSummary { results }
}

fn positivity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = TrendPolicy::default();
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let x = random_sequence(rng, 4096);
        for e in [
            dixmier_estimate(&x, &dyadic_schedule(4096), true, &p)?,
            zeta_residue_estimate(&x, &[10, 20, 50, 100, 200, 500, 1000, 2000, 5000], &p)?,
            heat_estimate(&x, &geometric_times(1.0, 1e4, 4), 1.0, Smoothing::Raw, &p)?,
        ] {
            if let Some(v) = e.value {
                worst = worst.min(v);
            }
        }
    }
    Ok((worst >= 0.0, format!("smallest estimate {worst:e}")))
}

fn homogeneity(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = TrendPolicy::default();
    let x = AnalyticSequence::Harmonic { c: 1.0 }.materialize(1 << 18)?;
    let ks = dyadic_schedule(1 << 18);
    let base = dixmier_estimate(&x, &ks, true, &p)?;
    let v = base.value.unwrap_or(f64::NAN);
    let mut worst = 0.0f64;
    for c in [0.5, 2.0, 10.0] {
        let e = dixmier_estimate(&x.scaled(c)?, &ks, true, &p)?;
        worst = worst.max((e.value.unwrap_or(f64::NAN) - c * v).abs() / (c * v));
    }
    Ok((base.status == TrendStatus::Converged && worst <= 1e-6, format!("largest relative deviation {worst:e}")))
}

fn singularity(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = TrendPolicy::default();
    let n = 1 << 20;
    let x = AnalyticSequence::Harmonic { c: 1.0 }.materialize(n)?;
    let mut v = x.values().to_vec();
    v[..100].fill(100.0);
    let y = SingularSequence::new(v)?;
    let ks = dyadic_schedule(n as u64);
    let a = dixmier_estimate(&x, &ks, true, &p)?.value.unwrap_or(f64::NAN);
    let b = dixmier_estimate(&y, &ks, true, &p)?.value.unwrap_or(f64::NAN);
    let d = (a - b).abs();
    Ok((d < 1e-3, format!("change {d:e}")))
}

fn monotonicity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ks: Vec<u64> = (1..=2048).collect();
    for _ in 0..20 {
        let y = random_sequence(rng, 2048);
        // x = y * g with g in [0, 1] nonincreasing keeps x nonincreasing and below y
        let mut g: Vec<f64> = (0..2048).map(|_| rng.gen::<f64>()).collect();
        g.sort_by(|a, b| b.total_cmp(a));
        let x = SingularSequence::new(y.values().iter().zip(&g).map(|(a, b)| a * b).collect())?;
        let ax = log_average(&x, &ks)?;
        let ay = log_average(&y, &ks)?;
        if let Some(k) = ax.alphas.iter().zip(&ay.alphas).position(|(a, b)| a > b) {
            return Ok((false, format!("alpha_{} violated", k + 1)));
        }
    }
    Ok((true, "20 pairs".into()))
}

fn harmonic_submajorization(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let h = AnalyticSequence::Harmonic { c: 1.0 }.materialize(1024)?;
    for i in 0..1000 {
        let x = random_sequence(rng, 1024);
        let norm = norm_1_inf(&x);
        let x = if norm > 1.0 { x.scaled(1.0 / norm)? } else { x };
        if !submajorizes(&h, &x) {
            return Ok((false, format!("sample {i} not submajorized")));
        }
    }
    Ok((true, "1000 samples".into()))
}

fn nc_torus_trace(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for theta in [0.0, 0.3, (5f64.sqrt() - 1.0) / 2.0] {
        for _ in 0..10 {
            let terms = rng.gen_range(1..=9);
            let a = NCTorusElement::new(
                theta,
                (0..terms).map(|_| {
                    (
                        (rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                }),
            )?;
            for m in -3..=3 {
                for n in -3..=3 {
                    let w = NCTorusElement::monomial(theta, m, n)?;
                    let c = nc_product(&nc_product(&nc_star(&w), &a)?, &w)?;
                    worst = worst.max((nc_tau0(&c) - nc_tau0(&a)).norm());
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("largest deviation {worst:e}")))
}

fn shift_defects(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = floor_embed(&x)?;
    let mut worst = 0.0f64;
    for j in [1, 2, 5] {
        for t in [10.0, 100.0, 1000.0] {
            worst = worst.max(commutator_defect(MapPair::ShiftFloor(j), DefectInput::Sequence(&x), t)?);
            worst = worst.max(commutator_defect(MapPair::ShiftLinear(j), DefectInput::Sequence(&x), t + 0.5)?);
            worst = worst.max(commutator_defect(MapPair::ShiftWindow(j), DefectInput::Function(&f), t)?);
        }
    }
    Ok((worst == 0.0, format!("largest defect {worst:e}")))
}

fn unitary_invariance(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a = random_complex_matrix(rng, 16);
        let u = random_unitary(rng, 16);
        let v = random_unitary(rng, 16);
        let s = singular_values(&a)?;
        let t = singular_values(&(&u * &a * &v))?;
        for (x, y) in s.values().iter().zip(t.values()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok((worst <= 1e-8, format!("largest deviation {worst:e}")))
}

fn hermitian_reconstruction(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a = random_complex_matrix(rng, 16);
        let parts = hermitian_decompose(&a)?;
        worst = worst.max((parts.reconstruct() - &a).camax());
    }
    Ok((worst <= 1e-10, format!("largest entry error {worst:e}")))
}
