use landscape::metrics::{adns, cosine_similarity, entropy, magnitude, normalize_sum};
use proptest::prelude::*;

fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn nonneg(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(0.0f64..5.0, n))
        .prop_filter("positive mass", |v| v.iter().sum::<f64>() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cosine_symmetric_and_bounded((a, b) in vec_pair()) {
        let ab = cosine_similarity(&a, &b).value;
        let ba = cosine_similarity(&b, &a).value;
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn cosine_scale_invariant((a, b) in vec_pair(), s in 0.01f64..100.0) {
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        let c = cosine_similarity(&a, &b);
        let cs = cosine_similarity(&scaled, &b);
        prop_assert_eq!(c.degenerate, cs.degenerate);
        prop_assert!((c.value - cs.value).abs() < 1e-9);
    }

    #[test]
    fn self_cosine_is_one(a in nonneg(1..40)) {
        prop_assert!((cosine_similarity(&a, &a).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounds(v in nonneg(1..60)) {
        let h = entropy(&v).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (v.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn uniform_entropy_is_ln_n(n in 1usize..200, w in 0.01f64..50.0) {
        prop_assert!((entropy(&vec![w; n]).unwrap() - (n as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn point_mass_entropy_is_zero(n in 1usize..100, at in 0usize..100, w in 0.01f64..50.0) {
        let mut v = vec![0.0; n];
        v[at % n] = w;
        prop_assert_eq!(entropy(&v).unwrap(), 0.0);
    }

    #[test]
    fn adns_bounds_and_identity(a in nonneg(5..6), b in nonneg(5..6), s in 0.1f64..10.0) {
        let d = adns(&a, &b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        prop_assert!(adns(&a, &scaled).unwrap() < 1e-12);
        prop_assert!((d - adns(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn adns_disjoint_support_is_two(n in 2usize..30, split in 1usize..29, w in 0.1f64..5.0) {
        let split = split.min(n - 1);
        let a: Vec<f64> = (0..n).map(|i| if i < split { w } else { 0.0 }).collect();
        let b: Vec<f64> = (0..n).map(|i| if i < split { 0.0 } else { w }).collect();
        prop_assert!((adns(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_idempotent(v in nonneg(1..40)) {
        let p = normalize_sum(&v).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = normalize_sum(&p).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn magnitude_matches_dot((a, _) in vec_pair()) {
        let dot: f64 = a.iter().map(|x| x * x).sum();
        prop_assert!((magnitude(&a).powi(2) - dot).abs() < 1e-9 * (1.0 + dot));
    }
}
