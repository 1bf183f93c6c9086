use num_complex::Complex64;
use proptest::prelude::*;

use dixlab::estimate::{dixmier_estimate, dyadic_schedule, zeta_residue_estimate, AnalyticSequence};
use dixlab::harness::{emit_config, emit_json, parse_config, parse_report_json, run_experiment};
use dixlab::maps::{commutator_defect, floor_embed, restrict, DefectInput, MapPair};
use dixlab::models::{nc_product, nc_star, nc_tau0, NCTorusElement};
use dixlab::seq::{decreasing_rearrangement, log_average, norm_1_inf, submajorizes, SingularSequence};
use dixlab::trend::TrendPolicy;

fn sorted(v: &[f64]) -> SingularSequence {
    decreasing_rearrangement(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_is_idempotent_and_order_blind(mut v in prop::collection::vec(-10.0f64..10.0, 0..200), seed in any::<u64>()) {
        let once = sorted(&v);
        prop_assert_eq!(sorted(once.values()), once.clone());
        // deterministic shuffle
        let n = v.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(sorted(&v), once);
    }

    #[test]
    fn alphas_stay_below_the_norm(v in prop::collection::vec(0.0f64..5.0, 2..300)) {
        let x = sorted(&v);
        let ks: Vec<u64> = (1..=x.len() as u64).collect();
        let norm = norm_1_inf(&x);
        for a in log_average(&x, &ks).unwrap().alphas {
            prop_assert!(a <= norm * (1.0 + 1e-12));
        }
    }

    #[test]
    fn partial_sums_are_subadditive(pair in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..200)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ks: Vec<u64> = (1..=a.len() as u64).collect();
        let (x, y, z) = (sorted(&a), sorted(&b), sorted(&sum));
        let (sx, sy, sz) = (x.partial_sums(&ks).unwrap(), y.partial_sums(&ks).unwrap(), z.partial_sums(&ks).unwrap());
        for i in 0..ks.len() {
            prop_assert!(sz[i] <= (sx[i] + sy[i]) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn unit_ball_is_dominated_by_harmonic(v in prop::collection::vec(0.0f64..1.0, 1..500)) {
        let x = sorted(&v);
        prop_assume!(norm_1_inf(&x) > 0.0);
        let x = x.scaled(1.0 / norm_1_inf(&x)).unwrap();
        let h = AnalyticSequence::Harmonic { c: 1.0 }.materialize(x.len()).unwrap();
        prop_assert!(submajorizes(&h, &x));
    }

    #[test]
    fn estimates_of_nonnegative_input_are_nonnegative(v in prop::collection::vec(0.0f64..1.0, 64..2048)) {
        let x = sorted(&v);
        let p = TrendPolicy::default();
        let d = dixmier_estimate(&x, &dyadic_schedule(x.len() as u64), true, &p).unwrap();
        let z = zeta_residue_estimate(&x, &[10, 20, 50, 100, 200], &p).unwrap();
        for e in [d, z] {
            if let Some(value) = e.value {
                prop_assert!(value >= 0.0);
            }
        }
    }

    #[test]
    fn estimates_are_homogeneous(c in 0.1f64..20.0) {
        let x = AnalyticSequence::Harmonic { c: 1.0 }.materialize(1 << 16).unwrap();
        let ks = dyadic_schedule(1 << 16);
        let p = TrendPolicy::default();
        let base = dixmier_estimate(&x, &ks, true, &p).unwrap().value.unwrap();
        let scaled = dixmier_estimate(&x.scaled(c).unwrap(), &ks, true, &p).unwrap().value.unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-6 * c * base);
    }

    #[test]
    fn restriction_inverts_floor_embedding(v in prop::collection::vec(-5.0f64..5.0, 1..100)) {
        prop_assert_eq!(restrict(&floor_embed(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn shifts_commute_with_embeddings(v in prop::collection::vec(-5.0f64..5.0, 40..120), j in 1usize..8, t in 0.0f64..30.0) {
        prop_assert_eq!(commutator_defect(MapPair::ShiftFloor(j), DefectInput::Sequence(&v), t).unwrap(), 0.0);
        prop_assert_eq!(commutator_defect(MapPair::ShiftLinear(j), DefectInput::Sequence(&v), t).unwrap(), 0.0);
        let f = floor_embed(&v).unwrap();
        prop_assert_eq!(commutator_defect(MapPair::ShiftWindow(j), DefectInput::Function(&f), t.floor()).unwrap(), 0.0);
    }

    #[test]
    fn nc_trace_is_conjugation_invariant(
        theta in 0.0f64..1.0,
        coeffs in prop::collection::vec(((-4i64..=4, -4i64..=4), (-1.0f64..1.0, -1.0f64..1.0)), 1..10),
        m in -3i64..=3,
        n in -3i64..=3,
    ) {
        let a = NCTorusElement::new(theta, coeffs.into_iter().map(|(k, (re, im))| (k, Complex64::new(re, im)))).unwrap();
        let w = NCTorusElement::monomial(theta, m, n).unwrap();
        let c = nc_product(&nc_product(&nc_star(&w), &a).unwrap(), &w).unwrap();
        prop_assert!((nc_tau0(&c) - a.coefficient(0, 0)).norm() <= 1e-12);
    }

    #[test]
    fn configs_round_trip(c in 0.1f64..10.0, horizon in 16u64..1_000_000, k_max in 20u64..500, seed in any::<u64>()) {
        let text = format!(
            r#"{{"schema_version": 1, "seed": {seed}, "model": {{"kind": "harmonic", "c": {c}}},
                "estimators": [{{"method": "dixmier_alpha", "horizon": {horizon}}}, {{"method": "zeta_residue", "k_max": {k_max}}}]}}"#
        );
        let config = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&emit_config(&config)).unwrap(), config);
    }
}

#[test]
fn reports_round_trip_through_json() {
    let config = parse_config(
        r#"{"schema_version": 1, "model": {"kind": "power_log", "c": 1.5, "a": 1, "b": 0},
            "estimators": [{"method": "dixmier_alpha"}, {"method": "zeta_residue"}]}"#,
    )
    .unwrap();
    let report = run_experiment(&config, None);
    let json = String::from_utf8(emit_json(&report).unwrap()).unwrap();
    assert_eq!(parse_report_json(&json).unwrap(), report);
}
