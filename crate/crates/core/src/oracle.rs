//! Brute-force validators. Nothing here calls the transform, QR or closed-form code it
//! checks: every value is recomputed from its definition by direct summation.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::error::{param, Result};
use crate::factorizer;
use crate::matrix::Matrix;
use crate::mechanism::{rng_for, trial_seed};
use crate::RootsProfile;
use crate::weights::WeightSpec;

type C64 = Complex<f64>;

/// `ω^k` for `ω = e^{iπ/n}`, with the exponent reduced modulo `2n` before the angle is
/// formed so large products do not lose accuracy.
fn omega_pow(n: usize, k: i64) -> C64 {
    let r = k.rem_euclid(2 * n as i64) as f64;
    C64::from_polar(1.0, PI * r / n as f64)
}

/// `m_f(ω^ℓ) = Σ_k f(k) ω^{kℓ}` for `ℓ = 0..2n` by direct summation.
pub fn naive_eval(f: &[f64]) -> Vec<C64> {
    let n = f.len();
    (0..2 * n as i64)
        .map(|l| {
            f.iter()
                .enumerate()
                .map(|(k, &v)| omega_pow(n, k as i64 * l) * v)
                .sum()
        })
        .collect()
}

/// `b_m = (1/2n) Σ_ℓ ζ_ℓ ω^{mℓ}` by direct summation.
pub fn naive_b(zeta: &[C64]) -> Vec<C64> {
    let order = zeta.len();
    let n = order / 2;
    (0..order as i64)
        .map(|m| {
            zeta.iter()
                .enumerate()
                .map(|(l, &z)| z * omega_pow(n, m * l as i64))
                .sum::<C64>()
                / order as f64
        })
        .collect()
}

/// Coefficient check of `Σ_k b(ω^k) c(ω^{-k} x) = a(x)` with `c = b`,
/// `b(x) = (1/2n) Σ ζ_ℓ x^ℓ` and `a(x) = (1/2n) Σ m_ℓ x^ℓ`.
///
/// The left side is expanded by direct summation over `k` and `ℓ`; the right side uses
/// `m` from [`naive_eval`]. Returns the largest coefficient deviation.
pub fn verify_chalkley(profile: &RootsProfile, f: &[f64]) -> f64 {
    let n = profile.n;
    let order = 2 * n;
    let m = naive_eval(f);
    (0..order)
        .map(|l| {
            let gamma = profile.zeta[l] / order as f64;
            let lhs: C64 = (0..order)
                .map(|k| profile.b_vals[k] * gamma * omega_pow(n, -((k * l) as i64)))
                .sum();
            (lhs - m[l] / order as f64).norm()
        })
        .fold(0.0, f64::max)
}

/// Largest deviation of `a_f(ω^{-d}) = (1/2n) Σ m_ℓ ω^{-dℓ}` from `f(d)` on `0..n` and
/// from 0 on `-n..0` and `n..2n`.
pub fn verify_window(profile: &RootsProfile, f: &[f64]) -> f64 {
    let n = profile.n;
    let order = 2 * n as i64;
    (-(n as i64)..order)
        .map(|d| {
            let a: C64 = profile
                .m_vals
                .iter()
                .enumerate()
                .map(|(l, &v)| v * omega_pow(n, -d * l as i64))
                .sum::<C64>()
                / order as f64;
            let expected = if (0..n as i64).contains(&d) { f[d as usize] } else { 0.0 };
            (a - expected).norm()
        })
        .fold(0.0, f64::max)
}

/// `max |L R - M|` with a plain triple loop.
pub fn verify_reconstruction(left: &Matrix<f64>, right: &Matrix<f64>, workload: &Matrix<f64>) -> f64 {
    let (n, inner) = left.shape();
    assert_eq!(right.rows(), inner);
    assert_eq!(workload.shape(), (n, right.cols()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in 0..right.cols() {
            let mut s = 0.0;
            for j in 0..inner {
                s += left[(i, j)] * right[(j, k)];
            }
            worst = worst.max((s - workload[(i, k)]).abs());
        }
    }
    worst
}

/// Same for the complex pattern factors, using the index rules directly.
pub fn verify_pattern_reconstruction(b_vals: &[C64], rows: usize, f: &[f64]) -> f64 {
    let order = b_vals.len() as i64;
    let b = |d: i64| b_vals[d.rem_euclid(order) as usize];
    let mut worst = 0.0f64;
    for i in 0..rows as i64 {
        for k in 0..rows as i64 {
            let s: C64 = (0..order).map(|j| b(j - i) * b(k - j)).sum();
            let expected = if i >= k { f[(i - k) as usize] } else { 0.0 };
            worst = worst.max((s - expected).norm());
        }
    }
    worst
}

/// Entrywise exact comparison of the striped matrix with `M_count(n/b) ⊗ I_b`.
pub fn kron_striped_check(n: usize, b: usize) -> Result<bool> {
    if b == 0 || n % b != 0 {
        return param(format!("stripe width {b} does not divide {n}"));
    }
    let striped = Matrix::from_fn(n, n, |i, j| if j <= i && (i - j) % b == 0 { 1.0 } else { 0.0 });
    let blocks = n / b;
    let count = Matrix::from_fn(blocks, blocks, |i, j| if j <= i { 1.0 } else { 0.0 });
    Ok(count.kron(&Matrix::<f64>::identity(b)) == striped)
}

/// `max_ℓ | |1 - ω^ℓ| - 2 sin(πℓ/2n) |` over `1 <= ℓ <= 2n-1`.
pub fn unit_root_distance_deviation(n: usize) -> f64 {
    (1..2 * n as i64)
        .map(|l| {
            let lhs = (C64::new(1.0, 0.0) - omega_pow(n, l)).norm();
            let rhs = 2.0 * (PI * l as f64 / (2.0 * n as f64)).sin();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest deviation between fast and naive `m` and `b` values.
pub fn fast_vs_naive(f: &[f64]) -> Result<f64> {
    let profile = RootsProfile::from_coefficients(f)?;
    let m = naive_eval(f);
    let b = naive_b(&profile.zeta);
    let dm = profile.m_vals.iter().zip(&m).map(|(x, y)| (x - y).norm());
    let db = profile.b_vals.iter().zip(&b).map(|(x, y)| (x - y).norm());
    Ok(dm.chain(db).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

/// Specs exercised by [`verify_suite`] at horizon `n`.
pub fn suite_specs(n: usize) -> Vec<WeightSpec> {
    let mut specs = vec![WeightSpec::counting(n).unwrap()];
    for w in [1, 4, 16] {
        if w <= n {
            specs.push(WeightSpec::sliding(n, w).unwrap());
        }
    }
    for b in [2, 4] {
        if b <= n {
            specs.push(WeightSpec::striped(n, b).unwrap());
        }
    }
    specs.push(WeightSpec::exp_decay(n, 0.9).unwrap());
    specs.push(WeightSpec::poly_decay(n, 1.0).unwrap());
    specs
}

/// Catalog used by the validation suites: counting, sliding `W ∈ {1, 4, 16}`, striped
/// `b ∈ {2, 4}`, exponential decay 0.9, polynomial decay 1, and ten seeded random
/// tables (the first five non-negative, the rest with mixed signs). Members whose
/// parameter does not fit under `n` are left out.
pub fn catalog(n: usize) -> Vec<WeightSpec> {
    let mut specs = suite_specs(n);
    for t in 0..10u64 {
        let mut rng = rng_for(trial_seed(0x7AB1E, t));
        let lo = if t < 5 { 0.0 } else { -1.0 };
        let values = (0..n).map(|_| rng.random_range(lo..1.0)).collect();
        specs.push(WeightSpec::table(n, values).unwrap());
    }
    specs
}

/// Every identity at horizon `n`, one row per (identity, spec).
pub fn verify_suite(n: usize) -> Result<Vec<Check>> {
    if n == 0 {
        return param("horizon n must be at least 1");
    }
    let mut out = vec![Check::new(
        format!("unit_root_distance n={n}"),
        unit_root_distance_deviation(n),
        1e-12,
    )];
    for spec in suite_specs(n) {
        let id = spec.id();
        let horizon = spec.factor_horizon();
        let f_full = spec.coefficients_to::<f64>(horizon);
        let f = spec.coefficients::<f64>();
        let fmax = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let profile = RootsProfile::from_coefficients(&f_full)?;

        out.push(Check::new(format!("fast_vs_naive {id}"), fast_vs_naive(&f_full)?, 1e-10));
        out.push(Check::new(format!("window {id}"), verify_window(&profile, &f_full), 1e-10));
        out.push(Check::new(format!("chalkley {id}"), verify_chalkley(&profile, &f_full), 1e-10));
        let lhs = profile.b_energy();
        let rhs = profile.abs_spectrum_sum() / profile.order() as f64;
        out.push(Check::new(
            format!("parseval {id}"),
            (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE),
            1e-10,
        ));

        let pattern = factorizer::build_pattern(&profile, &f);
        out.push(Check::new(
            format!("pattern_reconstruction {id}"),
            verify_pattern_reconstruction(&pattern.b_vals, n, &f),
            1e-8 * fmax,
        ));
        let workload = spec.build_matrix::<f64>()?.entries;
        let real = factorizer::realify(&pattern);
        out.push(Check::new(
            format!("real_reconstruction {id}"),
            verify_reconstruction(&real.left, &real.right, &workload),
            1e-8 * fmax,
        ));
        let tri = factorizer::triangularize(&real)?;
        out.push(Check::new(
            format!("triangular_reconstruction {id}"),
            verify_reconstruction(&tri.left, &tri.right, &workload),
            1e-8 * fmax,
        ));
        out.push(Check::new(
            format!("lower_triangular {id}"),
            if tri.left.is_lower_triangular() { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    for b in [2, 4] {
        if b <= n && n % b == 0 {
            let ok = kron_striped_check(n, b)?;
            out.push(Check::new(format!("kron_striped b={b}"), if ok { 0.0 } else { 1.0 }, 0.0));
        }
    }
    Ok(out)
}
