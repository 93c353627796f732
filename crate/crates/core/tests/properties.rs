use hypgaf::exact_l1::{build_model, pmf, tail_exact};
use hypgaf::gaf_model::GafSample;
use hypgaf::ldp_rates::{rate_function, Regime};
use hypgaf::specials::{lambert_w, Branch};
use hypgaf::zero_counter::{count_roots, count_winding, CountConfig};
use hypgaf::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_is_normalized(r in 0.05f64..0.95) {
        let model = build_model(r, 1e-12).unwrap();
        let p = pmf(&model).unwrap();
        prop_assert!((p.total() - 1.0).abs() < 1e-10);
        prop_assert!((p.mean() - model.mean()).abs() < 1e-8 * (1.0 + model.mean()));
        prop_assert!(p.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn tail_is_nonincreasing(r in 0.1f64..0.95, v in 0u64..40) {
        let model = build_model(r, 1e-12).unwrap();
        let a = tail_exact(&model, v).unwrap();
        let b = tail_exact(&model, v + 1).unwrap();
        prop_assert!(b <= a);
        // log-probabilities
        prop_assert!(a <= 0.0);
        if v == 0 {
            prop_assert_eq!(a, 0.0);
        }
    }

    #[test]
    fn lambert_w_inverts(x in -0.36787944f64..50.0) {
        let w = lambert_w(Branch::Principal, x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * (1.0 + x.abs()));
        prop_assert!(w >= -1.0);
    }

    #[test]
    fn rate_is_nonnegative_and_vanishes_at_zero(alpha in 0.6f64..3.0, x in -1.9f64..10.0) {
        let res = rate_function(alpha, x).unwrap();
        prop_assert!(res.value >= 0.0);
        if res.regime != Regime::AlphaHigh || x >= 0.0 {
            prop_assert!(res.value.is_finite());
        }
        prop_assert!(rate_function(alpha, 0.0).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn scaled_roots_count_matches(
        roots in prop::collection::vec((0.05f64..1.5, 0.0f64..std::f64::consts::TAU), 1..12),
        r in 0.2f64..0.95,
    ) {
        // keep every root clear of the contour
        prop_assume!(roots.iter().all(|&(m, _)| (m - r).abs() > 0.05));
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &(m, th) in &roots {
            let z = Complex64::from_polar(m, th);
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * z;
            }
            coeffs = next;
        }
        let expected = roots.iter().filter(|&&(m, _)| m < r).count() as u64;
        let s = GafSample::from_coeffs(coeffs);
        let cfg = CountConfig::new(r).unwrap();
        prop_assert_eq!(count_winding(&s, &cfg).unwrap().count, expected);
        prop_assert_eq!(count_roots(&s, &cfg).unwrap().count, expected);
    }
}
