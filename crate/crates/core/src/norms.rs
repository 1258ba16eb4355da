//! Generalized p-traces, operator norms, the spectral upper bound and the closed-form
//! upper and lower bounds for the counting, sliding and striped families.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::factorizer::{self, TRIANGULAR_CAP};
use crate::matrix::Matrix;
use crate::polyeval::RootsProfile;
use crate::scalar::{from_usize, lit, Scalar};
use crate::weights::{WeightFamily, WeightSpec};

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Exponent `p` in `[2, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 2.0 {
            Ok(PNorm::Finite(p))
        } else if p == f64::INFINITY {
            Ok(PNorm::Infinity)
        } else {
            Err(Error::Parameter(format!("p = {p} is below 2")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn inv(self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Infinity => 0.0,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PNorm::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parameter(format!("cannot parse p from `{s}`")))?;
                PNorm::finite(p)
            }
        }
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PNorm::Finite(p) => s.serialize_f64(*p),
            PNorm::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => PNorm::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

fn scaled_norm<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> T {
    let scale = values.clone().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    scale * values.map(|v| (v / scale) * (v / scale)).sum::<T>().sqrt()
}

/// Euclidean norm of each row.
pub fn row_norms<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    (0..m.rows()).map(|i| scaled_norm(m.row(i).iter().copied())).collect()
}

/// `‖M‖_{2→∞}`: largest row norm.
pub fn row_norm<T: Scalar>(m: &Matrix<T>) -> T {
    row_norms(m).into_iter().fold(T::zero(), T::max)
}

/// `‖M‖_{1→2}`: largest column norm.
pub fn col_norm<T: Scalar>(m: &Matrix<T>) -> T {
    (0..m.cols())
        .map(|j| scaled_norm((0..m.rows()).map(move |i| m[(i, j)])))
        .fold(T::zero(), T::max)
}

/// p-norm of a vector of row norms.
pub fn trace_p_from_row_norms<T: Scalar>(norms: &[T], p: PNorm) -> T {
    let max = norms.iter().fold(T::zero(), |m, &v| m.max(v));
    match p {
        PNorm::Infinity => max,
        PNorm::Finite(p) => {
            if max == T::zero() {
                return T::zero();
            }
            let p = lit::<T>(p);
            max * norms.iter().map(|&v| (v / max).powf(p)).sum::<T>().powf(T::one() / p)
        }
    }
}

/// `Tr_p(M) = (Σ_i (MMᵀ)_{ii}^{p/2})^{1/p}`; `Tr_∞` is the largest row norm.
pub fn trace_p<T: Scalar>(m: &Matrix<T>, p: PNorm) -> T {
    trace_p_from_row_norms(&row_norms(m), p)
}

/// `n^{1/p} (1/2n) Σ_k |m_f(ω^k)|`.
pub fn gamma_upper_formula<T: Scalar>(m_vals: &[Complex<T>], p: PNorm) -> T {
    let order = m_vals.len();
    assert!(order >= 2 && order % 2 == 0, "spectrum length must be 2n");
    let n = order / 2;
    let base = m_vals.iter().map(|v| v.norm()).sum::<T>() / from_usize::<T>(order);
    match p {
        PNorm::Infinity => base,
        PNorm::Finite(_) => base * from_usize::<T>(n).powf(lit(p.inv())),
    }
}

/// Compensated sum of `g(1) + ... + g(n)`.
fn csc_sum(n: usize, g: impl Fn(f64) -> f64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 1..=n {
        let x = g(i as f64);
        let t = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// `Σ_{i=1}^{n} csc((2i-1)π/(2n))`.
fn counting_csc_sum(n: usize) -> f64 {
    let nf = n as f64;
    csc_sum(n, |i| 1.0 / ((2.0 * i - 1.0) * PI / (2.0 * nf)).sin())
}

/// `1/2 + (1/2n) Σ_{ℓ=1}^{n} csc((2ℓ-1)π/(2n))`: the spectral bound for counting.
pub fn counting_closed_form(n: usize) -> f64 {
    assert!(n >= 1);
    0.5 + counting_csc_sum(n) / (2.0 * n as f64)
}

/// `1 + ln(2n/π)/π`.
pub fn counting_log_bound(n: usize) -> f64 {
    1.0 + (2.0 * n as f64 / PI).ln() / PI
}

/// `(ln((2n+1)/3) + 2)/π`.
pub fn lower_matousek(n: usize) -> f64 {
    (((2 * n + 1) as f64 / 3.0).ln() + 2.0) / PI
}

/// `((n+1)/(2n²)) Σ csc((2i-1)π/(2n))`, the reading that stays below the upper bound.
pub fn lower_mathias(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / (2.0 * nf * nf) * counting_csc_sum(n)
}

/// The same sum with prefactor `(n+1)/(2n)`. It exceeds the upper bound already at
/// `n = 2`, so it is exposed only for comparison.
pub fn lower_mathias_printed(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / (2.0 * nf) * counting_csc_sum(n)
}

/// `n^{1/p - 1} ‖M_count‖_{S_1}` with the trace norm `(1/2) Σ csc((2i-1)π/(4n+2))`.
pub fn lower_schatten(n: usize, p: PNorm) -> f64 {
    let nf = n as f64;
    let s1 = 0.5 * csc_sum(n, |i| 1.0 / ((2.0 * i - 1.0) * PI / (4.0 * nf + 2.0)).sin());
    nf.powf(p.inv() - 1.0) * s1
}

/// `(2/π + ln((2n+1)/5)/π + ln(2n+1)/(2nπ)) n^{1/p}`. Informational only.
pub fn schatten_asymptotic(n: usize, p: PNorm) -> f64 {
    let nf = n as f64;
    let m = 2.0 * nf + 1.0;
    (2.0 / PI + (m / 5.0).ln() / PI + m.ln() / (2.0 * nf * PI)) * nf.powf(p.inv())
}

/// `1 + (γ_E + ln n)/π`.
pub fn baseline_sqrt_bound(n: usize) -> f64 {
    1.0 + (EULER_GAMMA + (n as f64).ln()) / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlidingBounds {
    pub upper: f64,
    pub lower: f64,
    pub mathias: f64,
    pub matousek: f64,
}

/// `|m_f(ω^ℓ)|` for the window of `w` ones: `|sin(πwℓ/2n) / sin(πℓ/2n)|`, and `w` at ℓ = 0.
fn sliding_abs_spectrum(n: usize, w: usize) -> impl Iterator<Item = f64> {
    let (nf, wf) = (n as f64, w as f64);
    (0..2 * n).map(move |l| {
        if l == 0 {
            wf
        } else {
            let x = PI * l as f64 / (2.0 * nf);
            ((wf * x).sin() / x.sin()).abs()
        }
    })
}

/// Spectral upper bound for the sliding window at `p = ∞`, and the lower bound from the
/// `w x w` counting block sitting inside the window matrix.
pub fn sliding_bounds(n: usize, w: usize) -> Result<SlidingBounds> {
    if w == 0 || w > n {
        return Err(Error::Parameter(format!("sliding window {w} outside 1..={n}")));
    }
    let total: f64 = sliding_abs_spectrum(n, w).sum();
    let mathias = lower_mathias(w);
    let matousek = lower_matousek(w);
    Ok(SlidingBounds {
        upper: total / (2.0 * n as f64),
        lower: mathias.max(matousek),
        mathias,
        matousek,
    })
}

/// Counting bound at `ceil(n/b)`: the striped matrix is a counting matrix tensored with
/// an identity, and the identity factor contributes 1.
pub fn striped_upper(n: usize, b: usize) -> Result<f64> {
    if b == 0 || b > n {
        return Err(Error::Parameter(format!("stripe width {b} outside 1..={n}")));
    }
    Ok(counting_closed_form(n.div_ceil(b)))
}

/// Upper, achieved, closed-form and lower bounds for one `(spec, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub spec: String,
    pub n: usize,
    pub p: PNorm,
    pub formula_upper: f64,
    pub achieved: f64,
    pub closed_form: Option<f64>,
    pub lower: BTreeMap<String, f64>,
    pub baseline: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn best_lower(&self) -> Option<f64> {
        self.lower.values().copied().reduce(f64::max)
    }
}

/// Build the report. The achieved value comes from triangular factors when
/// `n <= triangular_cap`, otherwise from the pattern factors.
pub fn bound_report(spec: &WeightSpec, p: PNorm, triangular_cap: usize) -> Result<BoundReport> {
    let n = spec.n;
    let horizon = spec.factor_horizon();
    let profile = RootsProfile::<f64>::from_spec(spec)?;
    let formula_upper = gamma_upper_formula(&profile.m_vals, p);
    let scale = (n as f64).powf(p.inv());

    let mut flags = Vec::new();
    if spec.has_negative_weights() {
        flags.push("negative_weights".to_string());
    }
    if horizon != n {
        flags.push(format!("rounded_horizon={horizon}"));
    }
    let achieved = if n <= triangular_cap.min(TRIANGULAR_CAP) {
        factorizer::triangular::<f64>(spec)?.achieved(p)
    } else {
        flags.push("achieved_from_pattern".to_string());
        factorizer::build_pattern(&profile, &spec.coefficients::<f64>()).achieved(p)
    };

    let mut lower = BTreeMap::new();
    let mut baseline = BTreeMap::new();
    let closed_form = match &spec.family {
        WeightFamily::Counting => {
            lower.insert("mathias".into(), lower_mathias(n));
            lower.insert("matousek".into(), lower_matousek(n));
            lower.insert("schatten".into(), lower_schatten(n, p));
            baseline.insert("sqrt_baseline".into(), baseline_sqrt_bound(n) * scale);
            baseline.insert("log_bound".into(), counting_log_bound(n) * scale);
            baseline.insert("schatten_asymptotic".into(), schatten_asymptotic(n, p));
            Some(counting_closed_form(n) * scale)
        }
        WeightFamily::Sliding { window } => {
            let sb = sliding_bounds(n, *window)?;
            lower.insert("sliding_thm61".into(), sb.lower);
            Some(sb.upper * scale)
        }
        WeightFamily::Striped { stride } => {
            let blocks = n / stride;
            lower.insert("mathias".into(), lower_mathias(blocks));
            lower.insert("matousek".into(), lower_matousek(blocks));
            let upper = striped_upper(n, *stride)?;
            Some(upper * (horizon as f64).powf(p.inv()))
        }
        _ => None,
    };

    Ok(BoundReport {
        spec: spec.id(),
        n,
        p,
        formula_upper,
        achieved,
        closed_form,
        lower,
        baseline,
        flags,
    })
}
