//! Evaluation of the weight polynomial `m_f(x) = Σ f(k) x^k` and of its square-root
//! spectrum at the 2n-th roots of unity `ω^ℓ`, `ω = e^{iπ/n}`.
//!
//! Every sum here has the form `Σ_ℓ v[ℓ] ω^{ℓm}` with a *positive* exponent. That is the
//! unnormalized inverse DFT of length `2n` in rustfft's convention
//! (`X[m] = Σ_j x[j] e^{+2πi jm/N}`), so both `eval_m` and `eval_b` run an inverse
//! transform. The mapping is pinned by tests against direct summation.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde_json::{json, Value};

use crate::error::{param, Result};
use crate::scalar::{from_usize, lit, Scalar};
use crate::weights::WeightSpec;

/// `e^{2πi k / order}` for `k = 0..order`.
pub fn unit_roots<T: Scalar>(order: usize) -> Vec<Complex<T>> {
    let step = T::TAU() / from_usize::<T>(order);
    (0..order)
        .map(|k| Complex::from_polar(T::one(), step * from_usize(k)))
        .collect()
}

fn inverse_dft<T: Scalar>(values: &mut [Complex<T>]) {
    if values.len() > 1 {
        FftPlanner::new()
            .plan_fft_inverse(values.len())
            .process(values);
    }
}

/// `m_f(ω^ℓ)` for `ℓ = 0..2n`.
///
/// The output is made exactly conjugate-symmetric (`m[2n-ℓ] = conj(m[ℓ])`, `m[0]` and
/// `m[n]` real) and entries below the transform's roundoff floor are flushed to zero, so
/// spectra of palindromic or cancelling weights keep exact zeros instead of `1e-16` noise
/// whose square roots would be `1e-8`.
pub fn eval_m<T: Scalar>(f: &[T]) -> Result<Vec<Complex<T>>> {
    if f.is_empty() {
        return param("weight sequence is empty");
    }
    let n = f.len();
    let order = 2 * n;
    let mut m = vec![Complex::new(T::zero(), T::zero()); order];
    for (slot, &v) in m.iter_mut().zip(f) {
        slot.re = v;
    }
    inverse_dft(&mut m);

    m[0].im = T::zero();
    m[n].im = T::zero();
    let half = lit::<T>(0.5);
    for l in 1..n {
        let avg = (m[l] + m[order - l].conj()) * half;
        m[l] = avg;
        m[order - l] = avg.conj();
    }

    let mass = f.iter().fold(T::zero(), |s, v| s + v.abs());
    let floor = lit::<T>(16.0) * T::unit_roundoff() * (from_usize::<T>(order).log2() + T::one()) * mass;
    for v in m.iter_mut() {
        if v.norm() <= floor {
            *v = Complex::new(T::zero(), T::zero());
        }
    }
    Ok(m)
}

/// Principal square root: non-negative real part, and `+i√|x|` on the negative real axis.
pub fn principal_sqrt<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let zero = T::zero();
    if z.im == zero {
        return if z.re >= zero {
            Complex::new(z.re.sqrt(), zero)
        } else {
            Complex::new(zero, (-z.re).sqrt())
        };
    }
    let r = z.norm();
    let two = lit::<T>(2.0);
    if z.re >= zero {
        let t = ((r + z.re) / two).sqrt();
        Complex::new(t, z.im / (two * t))
    } else {
        let t = ((r - z.re) / two).sqrt();
        Complex::new(z.im.abs() / (two * t), t.copysign(z.im))
    }
}

/// `ζ_ℓ = sqrt(m_f(ω^ℓ))` entrywise on the principal branch.
pub fn sqrt_spectrum<T: Scalar>(m_vals: &[Complex<T>]) -> Vec<Complex<T>> {
    m_vals.iter().map(|&z| principal_sqrt(z)).collect()
}

/// `b_f(ω^m) = (1/2n) Σ_ℓ ζ_ℓ ω^{mℓ}` for `m = 0..2n`.
pub fn eval_b<T: Scalar>(zeta: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut b = zeta.to_vec();
    inverse_dft(&mut b);
    let scale = T::one() / from_usize::<T>(zeta.len().max(1));
    for v in b.iter_mut() {
        *v = *v * scale;
    }
    b
}

/// `a_f(ω^{-d}) = (1/2n) Σ_ℓ m_f(ω^ℓ) ω^{-dℓ}` for `-n <= d <= 2n-1`.
pub fn eval_a<T: Scalar>(m_vals: &[Complex<T>], d: i64) -> Result<Complex<T>> {
    let order = m_vals.len();
    if order == 0 || order % 2 != 0 {
        return param(format!("spectrum length {order} is not a positive even number"));
    }
    let n = (order / 2) as i64;
    if d < -n || d > 2 * n - 1 {
        return param(format!("offset {d} outside [-{n}, {}]", 2 * n - 1));
    }
    let roots = unit_roots::<T>(order);
    let ord = order as i64;
    let sum = m_vals
        .iter()
        .enumerate()
        .fold(Complex::new(T::zero(), T::zero()), |acc, (l, &v)| {
            let idx = (-d * l as i64).rem_euclid(ord) as usize;
            acc + v * roots[idx]
        });
    Ok(sum / from_usize::<T>(order))
}

/// `Σ_{ℓ<p} g^{kℓ}` for the generator `g = e^{2πi/p}`: `p` when `p | k`, else 0.
pub fn generator_sum<T: Scalar>(k: i64, p: usize) -> Complex<T> {
    assert!(p >= 1, "group order must be positive");
    let roots = unit_roots::<T>(p);
    (0..p as i64).fold(Complex::new(T::zero(), T::zero()), |acc, l| {
        acc + roots[(k * l).rem_euclid(p as i64) as usize]
    })
}

/// Spectra of one weight sequence over the 2n-th roots of unity.
#[derive(Clone, Debug, PartialEq)]
pub struct RootsProfile<T> {
    pub n: usize,
    pub m_vals: Vec<Complex<T>>,
    pub zeta: Vec<Complex<T>>,
    pub b_vals: Vec<Complex<T>>,
}

impl<T: Scalar> RootsProfile<T> {
    pub fn from_coefficients(f: &[T]) -> Result<Self> {
        let m_vals = eval_m(f)?;
        let zeta = sqrt_spectrum(&m_vals);
        let b_vals = eval_b(&zeta);
        Ok(Self {
            n: f.len(),
            m_vals,
            zeta,
            b_vals,
        })
    }

    /// Profile at the factorization horizon of `spec`.
    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        Self::from_coefficients(&spec.coefficients_to::<T>(spec.factor_horizon()))
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }

    /// `Σ_ℓ |m_f(ω^ℓ)|`.
    pub fn abs_spectrum_sum(&self) -> T {
        self.m_vals.iter().map(|v| v.norm()).sum()
    }

    /// `Σ_m |b_f(ω^m)|²`, the squared norm of every row of the left pattern factor.
    pub fn b_energy(&self) -> T {
        self.b_vals.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_imag_b(&self) -> T {
        self.b_vals.iter().fold(T::zero(), |m, v| m.max(v.im.abs()))
    }

    /// Debug dump with complex values as `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let pairs = |v: &[Complex<T>]| -> Vec<[f64; 2]> {
            v.iter()
                .map(|z| [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)])
                .collect()
        };
        json!({
            "n": self.n,
            "m_vals": pairs(&self.m_vals),
            "zeta": pairs(&self.zeta),
            "b_vals": pairs(&self.b_vals),
        })
    }
}
