//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Run with `cargo test -p gfdp-cli --test acceptance`.

use std::f64::consts::SQRT_2;
use std::process::{Command, ExitCode};
use std::time::Instant;

use gfdp_core::factorizer::{build_pattern, realify, triangularize};
use gfdp_core::mechanism::{rng_for, trial_seed, StreamState};
use gfdp_core::norms::*;
use gfdp_core::oracle::*;
use gfdp_core::polyeval::eval_m;
use gfdp_core::{PrivacyParams, RootsProfile, SigmaVariant, WeightSpec};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn horizons() -> Vec<usize> {
    (1..=64).chain([128, 256, 512]).collect()
}

fn fmax(f: &[f64]) -> f64 {
    f.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Criteria 1, 2 and the second half of 3 share one pass over the catalog.
struct CatalogSweep {
    worst_recon: (f64, String),
    worst_parseval: (f64, String),
    worst_excess: (f64, String),
}

fn sweep_catalog() -> CatalogSweep {
    let mut s = CatalogSweep {
        worst_recon: (0.0, String::new()),
        worst_parseval: (0.0, String::new()),
        worst_excess: (f64::NEG_INFINITY, String::new()),
    };
    for n in horizons() {
        for spec in catalog(n) {
            let tag = format!("{} n={n}", spec.id());
            let f = spec.coefficients::<f64>();
            let scale = fmax(&f);
            let profile = RootsProfile::from_spec(&spec).unwrap();
            let workload = spec.build_matrix::<f64>().unwrap().entries;

            let pattern = build_pattern(&profile, &f);
            let real = realify(&pattern);
            let tri = triangularize(&real).unwrap();
            let devs = [
                verify_pattern_reconstruction(&pattern.b_vals, n, &f),
                verify_reconstruction(&real.left, &real.right, &workload),
                verify_reconstruction(&tri.left, &tri.right, &workload),
            ];
            for (stage, d) in ["pattern", "real", "triangular"].iter().zip(devs) {
                let rel = d / scale;
                if rel > s.worst_recon.0 || rel.is_nan() {
                    s.worst_recon = (rel, format!("{tag} {stage}"));
                }
            }
            if !tri.left.is_lower_triangular() {
                s.worst_recon = (f64::INFINITY, format!("{tag} not lower-triangular"));
            }

            let lhs = profile.b_energy();
            let rhs = profile.abs_spectrum_sum() / profile.order() as f64;
            let rel = if rhs == 0.0 { lhs } else { (lhs - rhs).abs() / rhs };
            if rel > s.worst_parseval.0 || rel.is_nan() {
                s.worst_parseval = (rel, tag.clone());
            }

            for p in [PNorm::Finite(2.0), PNorm::Finite(3.0), PNorm::Infinity] {
                let excess = tri.achieved(p) - gamma_upper_formula(&profile.m_vals, p);
                if excess > s.worst_excess.0 {
                    s.worst_excess = (excess, format!("{tag} p={p}"));
                }
            }
        }
    }
    s
}

fn c1(s: &CatalogSweep) -> Outcome {
    outcome(
        s.worst_recon.0 <= 1e-8,
        format!("max |LR - M| / max(1, max|f|) = {:.2e} at {}", s.worst_recon.0, s.worst_recon.1),
    )
}

fn c2(s: &CatalogSweep) -> Outcome {
    outcome(
        s.worst_parseval.0 <= 1e-10,
        format!("max relative Parseval gap = {:.2e} at {}", s.worst_parseval.0, s.worst_parseval.1),
    )
}

fn c3(s: &CatalogSweep) -> Outcome {
    let mut worst = (0.0f64, 0usize);
    for n in 1..=4096 {
        let m = eval_m(&vec![1.0f64; n]).unwrap();
        let d = (gamma_upper_formula(&m, PNorm::Infinity) - counting_closed_form(n)).abs();
        if d > worst.0 {
            worst = (d, n);
        }
    }
    outcome(
        worst.0 <= 1e-9 && s.worst_excess.0 <= 1e-9,
        format!(
            "formula vs closed form max dev {:.2e} (n={}); max achieved - formula = {:.2e} at {}",
            worst.0, worst.1, s.worst_excess.0, s.worst_excess.1
        ),
    )
}

fn c4() -> Outcome {
    let m = eval_m(&[1.0f64, 1.0]).unwrap();
    let v = gamma_upper_formula(&m, PNorm::Infinity);
    let target = (1.0 + SQRT_2) / 2.0;
    outcome((v - target).abs() <= 1e-12, format!("value {v:.15}, target {target:.15}"))
}

fn c5() -> Outcome {
    let n = 1_000_000;
    let closed = counting_closed_form(n);
    let gap_lower = closed - lower_matousek(n);
    let gap_base = baseline_sqrt_bound(n) - closed;
    let log = counting_log_bound(n);
    println!(
        "    info: closed form {closed:.6}, log bound {log:.6}; log bound - matousek = {:.4}, baseline - log bound = {:.4}",
        log - lower_matousek(n),
        baseline_sqrt_bound(n) - log
    );
    outcome(
        (0.33..=0.36).contains(&gap_lower) && (0.31..=0.34).contains(&gap_base),
        format!("closed - matousek = {gap_lower:.4} (want [0.33, 0.36]); baseline - closed = {gap_base:.4} (want [0.31, 0.34])"),
    )
}

fn c6() -> Outcome {
    let mut c = f64::NEG_INFINITY;
    let mut at = 0;
    for n in 64..=4096 {
        let need = (counting_closed_form(n) - counting_log_bound(n)) * (n * n) as f64;
        if need > c {
            c = need;
            at = n;
        }
    }
    let n = at as f64;
    println!(
        "    info: closed form - log bound at n={at} is {:.6}",
        (counting_closed_form(at) - counting_log_bound(at))
    );
    outcome(c <= 10.0, format!("calibrated C = {c:.4e} (attained at n={at}, n^2={n:.0}^2); need C <= 10"))
}

fn c7() -> Outcome {
    let worst = (1..=256).map(unit_root_distance_deviation).fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn c8() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=64usize {
        for t in 0..20u64 {
            let mut rng = rng_for(trial_seed(n as u64 * 1000, t));
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let p = RootsProfile::from_coefficients(&f).unwrap();
            worst = worst.max(verify_window(&p, &f));
        }
    }
    outcome(worst <= 1e-10, format!("max window deviation {worst:.2e} over 1280 sequences"))
}

fn c9() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=32usize {
        let mut fs: Vec<Vec<f64>> = catalog(n)
            .iter()
            .map(|s| s.coefficients_to::<f64>(s.factor_horizon()))
            .collect();
        for t in 0..5u64 {
            let mut rng = rng_for(trial_seed(0xC4A1, n as u64 * 16 + t));
            fs.push((0..n).map(|_| rng.random_range(0.0..1.0)).collect());
        }
        for f in fs {
            let p = RootsProfile::from_coefficients(&f).unwrap();
            worst = worst.max(verify_chalkley(&p, &f));
        }
    }
    outcome(worst <= 1e-10, format!("max coefficient deviation {worst:.2e}"))
}

fn c10() -> Outcome {
    let cases = [(4, 2), (64, 4), (60, 5)];
    let kron_ok = cases.iter().all(|&(n, b)| kron_striped_check(n, b).unwrap());
    let mut worst = 0.0f64;
    let mut exact = true;
    for &(n, b) in &cases {
        let up = striped_upper(n, b).unwrap();
        exact &= up == counting_closed_form(n / b);
        let m = RootsProfile::from_spec(&WeightSpec::striped(n, b).unwrap()).unwrap().m_vals;
        worst = worst.max((gamma_upper_formula(&m, PNorm::Infinity) - up).abs());
    }
    outcome(
        kron_ok && exact && worst <= 1e-9,
        format!("kronecker identity exact: {kron_ok}; striped upper = counting(n/b): {exact}; spectral cross-check dev {worst:.2e}"),
    )
}

fn c11() -> Outcome {
    let n = 256;
    let spec = WeightSpec::counting(n).unwrap();
    let tri = gfdp_core::factorizer::triangular::<f64>(&spec).unwrap();
    let params = PrivacyParams::new(1.0, 1e-6, 1.0, SigmaVariant::Classic).unwrap();
    let sigma = params.sigma();
    let gamma = counting_closed_form(n);
    let bound = sigma * gamma * (n as f64).ln().sqrt();
    let workload = spec.build_matrix::<f64>().unwrap();
    let trials = 500;
    let mut maxima = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let mut data_rng = rng_for(trial_seed(0xDA7A, t));
        let x: Vec<f64> = (0..n).map(|_| data_rng.random_range(-1.0..=1.0)).collect();
        let truth = workload.apply(&x);
        let mut state = StreamState::init(&tri, &params, trial_seed(0x5EED, t)).unwrap();
        let mut worst = 0.0f64;
        for (i, &v) in x.iter().enumerate() {
            let a = state.step(v).unwrap().output;
            worst = worst.max((a - truth[i]).abs());
        }
        maxima.push(worst);
    }
    let mean = maxima.iter().sum::<f64>() / trials as f64;
    let within = maxima.iter().filter(|&&m| m <= bound).count();
    let ratio = mean / bound;
    println!(
        "    info: sigma {sigma:.4}, gamma {gamma:.6}, {within}/{trials} trials under the bound; sigma*gamma*sqrt(2 ln 2n) = {:.2}",
        sigma * gamma * (2.0 * (2.0 * n as f64).ln()).sqrt()
    );
    outcome(
        ratio <= 1.0,
        format!("mean max error {mean:.2} vs bound {bound:.2} (ratio {ratio:.3}; ratio > 1 fails)"),
    )
}

fn c12() -> Outcome {
    let n = 128;
    let mut worst = 0.0f64;
    let mut rng = rng_for(12);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    for spec in catalog(n) {
        let tri = gfdp_core::factorizer::triangular::<f64>(&spec).unwrap();
        let truth = spec.build_matrix::<f64>().unwrap().apply(&x);
        let mut s = StreamState::with_noise_std(&tri, 0.0, 1.0, 1).unwrap();
        for (t, &v) in x.iter().enumerate() {
            worst = worst.max((s.step(v).unwrap().output - truth[t]).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |a_t - (Mx)_t| with noise off = {worst:.2e}"))
}

fn c13() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_gfdp"))
            .args([
                "simulate", "--weight", "sliding", "--window", "16", "--n", "256", "--eps", "1",
                "--delta", "1e-6", "--seed", "7", "--trials", "50", "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("stream.csv")).unwrap()
    };
    let (a, b) = (run("first"), run("second"));
    outcome(a == b && !a.is_empty(), format!("{} bytes per run, identical: {}", a.len(), a == b))
}

fn c14() -> Outcome {
    let n = 128;
    let mut ok = true;
    let mut parts = Vec::new();
    for w in [4, 16, 64] {
        let sb = sliding_bounds(n, w).unwrap();
        let lower = lower_mathias(w).max(lower_matousek(w));
        ok &= sb.upper >= lower - 1e-9;
        parts.push(format!("W={w}: upper {:.4} >= lower {:.4}", sb.upper, lower));
    }
    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let sweep = sweep_catalog();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("reconstruction at every stage", Box::new(|| c1(&sweep))),
        ("Parseval row-norm tightness", Box::new(|| c2(&sweep))),
        ("formula consistency", Box::new(|| c3(&sweep))),
        ("n=2 counting bound", Box::new(c4)),
        ("gap claims at n=10^6", Box::new(c5)),
        ("log bound with C/n^2 slack", Box::new(c6)),
        ("unit root distances", Box::new(c7)),
        ("window identity", Box::new(c8)),
        ("convolution identity", Box::new(c9)),
        ("striped Kronecker structure", Box::new(c10)),
        ("mechanism error bound", Box::new(c11)),
        ("exactness with noise off", Box::new(c12)),
        ("simulate determinism", Box::new(c13)),
        ("sliding lower bound", Box::new(c14)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += (!o.pass) as usize;
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
