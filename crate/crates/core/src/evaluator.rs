//! Monte-Carlo error of the mechanism against the theoretical error bound.
//!
//! Since `a - M x = L z` regardless of `x`, the error distribution only depends on the
//! left factor and the noise scale, and trials sample `z` directly.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::factorizer;
use crate::matrix::Matrix;
use crate::mechanism::{gaussian_vector, rng_for, trial_seed, PrivacyParams};
use crate::norms::{bound_report, BoundReport, PNorm};
use crate::scalar::pairwise_sum;
use crate::weights::WeightSpec;

pub const DEFAULT_TRIALS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorEstimate {
    /// `(mean ‖Lz‖_p^p)^{1/p}`, or the mean of `max_t |(Lz)_t|` for `p = ∞`.
    pub value: f64,
    pub std_error: f64,
    /// Largest per-trial `‖Lz‖_p` (or max-norm) seen.
    pub max_over_trials: f64,
    pub per_trial: Vec<f64>,
}

/// Per-trial statistic: `Σ|y|^p`, or `max|y|`.
fn trial_stat(y: &[f64], p: PNorm) -> f64 {
    match p {
        PNorm::Infinity => y.iter().fold(0.0, |m, v| m.max(v.abs())),
        PNorm::Finite(p) => pairwise_sum(&y.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>()),
    }
}

pub fn empirical_err(left: &Matrix<f64>, noise_std: f64, p: PNorm, trials: usize, seed: u64) -> ErrorEstimate {
    assert!(trials >= 1, "need at least one trial");
    let width = left.cols();
    let stats: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(trial_seed(seed, i));
            let z = gaussian_vector(&mut rng, width, noise_std);
            trial_stat(&left.matvec(&z), p)
        })
        .collect();

    let t = trials as f64;
    let mean = pairwise_sum(&stats) / t;
    let var = if trials > 1 {
        pairwise_sum(&stats.iter().map(|s| (s - mean) * (s - mean)).collect::<Vec<_>>()) / (t - 1.0)
    } else {
        0.0
    };
    let se_mean = (var / t).sqrt();
    let (value, std_error, per_trial) = match p {
        PNorm::Infinity => (mean, se_mean, stats),
        PNorm::Finite(p) => {
            let value = mean.powf(1.0 / p);
            // delta method through x ↦ x^{1/p}
            let se = if mean > 0.0 { value / (p * mean) * se_mean } else { 0.0 };
            (value, se, stats.iter().map(|s| s.powf(1.0 / p)).collect())
        }
    };
    let max_over_trials = per_trial.iter().fold(0.0f64, |m, &v| m.max(v));
    ErrorEstimate {
        value,
        std_error,
        max_over_trials,
        per_trial,
    }
}

/// `σ γ min(p, √ln n)`; `p = ∞` uses `√ln n`.
pub fn theoretical_bound(gamma: f64, sigma: f64, p: PNorm, n: usize) -> f64 {
    let root_log = (n as f64).ln().sqrt();
    let factor = match p {
        PNorm::Finite(p) => p.min(root_log),
        PNorm::Infinity => root_log,
    };
    sigma * gamma * factor
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub spec: String,
    pub n: usize,
    pub p: PNorm,
    pub trials: usize,
    pub seed: u64,
    pub empirical_err: f64,
    pub std_error: f64,
    pub max_over_trials: f64,
    pub bound: f64,
    pub ratio: f64,
    pub violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<f64>>,
}

impl ErrorReport {
    pub fn new(spec: String, n: usize, p: PNorm, trials: usize, seed: u64, est: ErrorEstimate, bound: f64) -> Self {
        let ratio = if bound > 0.0 {
            est.value / bound
        } else if est.value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            spec,
            n,
            p,
            trials,
            seed,
            empirical_err: est.value,
            std_error: est.std_error,
            max_over_trials: est.max_over_trials,
            bound,
            ratio,
            violation: ratio > 1.0,
            per_trial: Some(est.per_trial),
        }
    }

    pub fn without_trials(mut self) -> Self {
        self.per_trial = None;
        self
    }
}

/// Error report for one spec: triangular factors, noise `σ ‖R‖_{1→2}`, and the bound
/// evaluated with the spectral upper bound as `γ`.
pub fn error_report(spec: &WeightSpec, params: &PrivacyParams, p: PNorm, trials: usize, seed: u64) -> Result<ErrorReport> {
    let tri = factorizer::triangular::<f64>(spec)?;
    let sigma = params.sigma();
    let est = empirical_err(&tri.left, sigma * tri.sensitivity, p, trials, seed);
    let profile = crate::polyeval::RootsProfile::<f64>::from_spec(spec)?;
    let gamma = crate::norms::gamma_upper_formula(&profile.m_vals, p);
    let bound = theoretical_bound(gamma, sigma, p, spec.n);
    Ok(ErrorReport::new(spec.id(), spec.n, p, trials, seed, est, bound))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub bounds: BoundReport,
    pub error: ErrorReport,
}

/// Bound and error reports over the grid `specs x ns x ps`.
pub fn compare(
    specs: &[WeightSpec],
    ns: &[usize],
    params: &PrivacyParams,
    ps: &[PNorm],
    trials: usize,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        for &n in ns {
            let s = spec.with_n(n)?;
            for &p in ps {
                let bounds = bound_report(&s, p, factorizer::TRIANGULAR_CAP)?;
                let error = error_report(&s, params, p, trials, seed)?.without_trials();
                rows.push(ComparisonRow { bounds, error });
            }
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "spec,n,p,formula_upper,achieved,closed_form,best_lower,sqrt_baseline,empirical,std_error,bound,ratio,violation\n",
    );
    for r in rows {
        let b = &r.bounds;
        let e = &r.error;
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{},{},{},{},{},{},{},{},{}",
            b.spec,
            b.n,
            b.p,
            b.formula_upper,
            b.achieved,
            opt(b.closed_form),
            opt(b.best_lower()),
            opt(b.baseline.get("sqrt_baseline").copied()),
            e.empirical_err,
            e.std_error,
            e.bound,
            e.ratio,
            e.violation
        );
    }
    out
}

/// `spec,p,n,bound,empirical,lower` columns for external plotting.
pub fn plot_data(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("spec,p,n,bound,empirical,lower\n");
    for r in rows {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{},{}",
            r.bounds.spec,
            r.bounds.p,
            r.bounds.n,
            r.error.bound,
            r.error.empirical_err,
            opt(r.bounds.best_lower())
        );
    }
    out
}
