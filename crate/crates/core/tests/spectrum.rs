use gfdp_core::oracle::{naive_b, naive_eval, unit_root_distance_deviation, verify_chalkley, verify_window};
use gfdp_core::polyeval::{eval_a, eval_m, generator_sum, principal_sqrt};
use gfdp_core::{RootsProfile, WeightSpec};
use num_complex::Complex;
use proptest::prelude::*;

fn weights(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_matches_naive(f in weights(128)) {
        let p = RootsProfile::from_coefficients(&f).unwrap();
        for (a, b) in p.m_vals.iter().zip(naive_eval(&f)) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
        for (a, b) in p.b_vals.iter().zip(naive_b(&p.zeta)) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn square_roots_and_symmetry(f in prop::collection::vec(-1.0f64..1.0, 1..=96)) {
        let p = RootsProfile::from_coefficients(&f).unwrap();
        let order = p.order();
        for l in 0..order {
            let m = p.m_vals[l];
            prop_assert!((p.zeta[l] * p.zeta[l] - m).norm() <= 1e-12 * m.norm().max(1.0));
            prop_assert!(p.zeta[l].re >= 0.0);
            if l > 0 {
                prop_assert!((p.m_vals[order - l] - m.conj()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn parseval(f in prop::collection::vec(-1.0f64..2.0, 1..=128)) {
        let p = RootsProfile::from_coefficients(&f).unwrap();
        let lhs = p.b_energy();
        let rhs = p.abs_spectrum_sum() / p.order() as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn window_identity(f in weights(64)) {
        let p = RootsProfile::from_coefficients(&f).unwrap();
        prop_assert!(verify_window(&p, &f) <= 1e-10);
        let n = f.len() as i64;
        for d in -n..2 * n {
            let a = eval_a(&p.m_vals, d).unwrap();
            let expected = if (0..n).contains(&d) { f[d as usize] } else { 0.0 };
            prop_assert!((a - expected).norm() <= 1e-10);
        }
    }

    #[test]
    fn chalkley_identity(f in weights(32)) {
        let p = RootsProfile::from_coefficients(&f).unwrap();
        prop_assert!(verify_chalkley(&p, &f) <= 1e-10);
    }

    #[test]
    fn generator_sums(k in -200i64..200, p in 1usize..40) {
        let s = generator_sum::<f64>(k, p);
        let expected = if k.rem_euclid(p as i64) == 0 { p as f64 } else { 0.0 };
        prop_assert!((s - Complex::new(expected, 0.0)).norm() <= 1e-10);
    }
}

#[test]
fn chalkley_over_named_families() {
    for n in 1..=32 {
        for spec in gfdp_core::oracle::suite_specs(n) {
            let f = spec.coefficients_to::<f64>(spec.factor_horizon());
            let p = RootsProfile::from_coefficients(&f).unwrap();
            assert!(verify_chalkley(&p, &f) <= 1e-10, "{} n={n}", spec.id());
        }
    }
}

#[test]
fn unit_root_distances() {
    for n in 1..=256 {
        assert!(unit_root_distance_deviation(n) <= 1e-12, "n={n}");
    }
}

#[test]
fn counting_two_by_hand() {
    // m = [2, 1+i, 0, 1-i]; ζ from the principal root of each.
    let p = RootsProfile::from_spec(&WeightSpec::counting(2).unwrap()).unwrap();
    let zeta = [
        Complex::new(2f64.sqrt(), 0.0),
        principal_sqrt(Complex::new(1.0, 1.0)),
        Complex::new(0.0, 0.0),
        principal_sqrt(Complex::new(1.0, -1.0)),
    ];
    let by_hand: Vec<Complex<f64>> = (0..4)
        .map(|m| {
            (0..4)
                .map(|l| zeta[l] * Complex::new(0.0, 1.0).powi((m * l) as i32))
                .sum::<Complex<f64>>()
                / 4.0
        })
        .collect();
    for (a, b) in p.b_vals.iter().zip(&by_hand) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!((by_hand[0].re - 0.90290).abs() < 5e-6);
    assert!((by_hand[2].re + 0.19579).abs() < 5e-6);
}

#[test]
fn arbitrary_lengths_are_supported() {
    // prime, odd and power-of-two transform sizes
    for n in [1usize, 3, 7, 13, 50, 97, 128, 1000] {
        let f: Vec<f64> = (0..n).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let fast = eval_m(&f).unwrap();
        assert_eq!(fast.len(), 2 * n);
        if n <= 128 {
            for (a, b) in fast.iter().zip(naive_eval(&f)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let f: Vec<f64> = (0..40).map(|k| 0.95f64.powi(k)).collect();
    let f32s: Vec<f32> = f.iter().map(|&v| v as f32).collect();
    let wide = RootsProfile::from_coefficients(&f).unwrap();
    let narrow = gfdp_core::RootsProfile32::from_coefficients(&f32s).unwrap();
    for (a, b) in wide.b_vals.iter().zip(&narrow.b_vals) {
        assert!((a.re - b.re as f64).abs() < 1e-4 && (a.im - b.im as f64).abs() < 1e-4);
    }
}
