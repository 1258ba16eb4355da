use gfdp_core::evaluator::{empirical_err, theoretical_bound, DEFAULT_TRIALS};
use gfdp_core::factorizer::triangular;
use gfdp_core::norms::{gamma_upper_formula, PNorm};
use gfdp_core::oracle::catalog;
use gfdp_core::{PrivacyParams, RootsProfile, SigmaVariant, WeightSpec};

fn params() -> PrivacyParams {
    PrivacyParams::new(1.0, 1e-6, 1.0, SigmaVariant::Classic).unwrap()
}

#[test]
fn finite_p_error_within_bound() {
    let sigma = params().sigma();
    for n in [8, 32, 128, 512] {
        for spec in catalog(n) {
            let tri = triangular::<f64>(&spec).unwrap();
            let m = RootsProfile::from_spec(&spec).unwrap().m_vals;
            for p in [PNorm::Finite(2.0), PNorm::Finite(3.0)] {
                let est = empirical_err(&tri.left, sigma * tri.sensitivity, p, DEFAULT_TRIALS, 17);
                let bound = theoretical_bound(gamma_upper_formula(&m, p), sigma, p, n);
                assert!(est.value <= bound, "{} n={n} p={p}: {} > {bound}", spec.id(), est.value);
            }
        }
    }
}

#[test]
fn max_error_within_gaussian_maximum_scale() {
    // E max_t |(Lz)_t| over n Gaussians of scale at most σγ is below σγ √(2 ln 2n)
    let sigma = params().sigma();
    for n in [8, 64, 256] {
        for spec in catalog(n) {
            let tri = triangular::<f64>(&spec).unwrap();
            let m = RootsProfile::from_spec(&spec).unwrap().m_vals;
            let gamma = gamma_upper_formula(&m, PNorm::Infinity);
            let est = empirical_err(&tri.left, sigma * tri.sensitivity, PNorm::Infinity, DEFAULT_TRIALS, 3);
            let scale = sigma * gamma * (2.0 * (2.0 * n as f64).ln()).sqrt();
            assert!(est.value <= scale, "{} n={n}", spec.id());
        }
    }
}

#[test]
fn doubling_trials_is_consistent() {
    let spec = WeightSpec::counting(64).unwrap();
    let tri = triangular::<f64>(&spec).unwrap();
    let std = params().sigma() * tri.sensitivity;
    for p in [PNorm::Finite(2.0), PNorm::Finite(3.0), PNorm::Infinity] {
        let a = empirical_err(&tri.left, std, p, 500, 101);
        let b = empirical_err(&tri.left, std, p, 1000, 202);
        let se = a.std_error.hypot(b.std_error);
        assert!((a.value - b.value).abs() <= 3.0 * se, "{p}: {} vs {} (se {se})", a.value, b.value);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tri = triangular::<f64>(&WeightSpec::sliding(40, 6).unwrap()).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| empirical_err(&tri.left, 2.0, PNorm::Finite(3.0), 200, 9));
    let b = four.install(|| empirical_err(&tri.left, 2.0, PNorm::Finite(3.0), 200, 9));
    assert_eq!(a, b);
}
