//! Factorizations `M_f = L R` at three stages: the complex group-pattern pair built from
//! `b_f(ω^m)`, its real rectangular embedding, and a real lower-triangular pair obtained
//! by orthogonal triangularization of the real left factor.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::norms::{col_norm, row_norms, trace_p_from_row_norms, PNorm};
use crate::polyeval::RootsProfile;
use crate::qr::HouseholderQr;
use crate::scalar::{from_usize, lit, Scalar};
use crate::weights::WeightSpec;

/// Largest `n` the triangular stage will materialize by default.
pub const TRIANGULAR_CAP: usize = 8192;

/// Imaginary parts of `b_vals` below this are treated as zero when realifying.
pub const THIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pattern,
    Triangular,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pattern" => Ok(Mode::Pattern),
            "triangular" => Ok(Mode::Triangular),
            other => Err(Error::Parameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// A left factor that noise is pushed through, and the sensitivity of its right partner.
pub trait NoiseShape<T> {
    fn left(&self) -> &Matrix<T>;
    fn sensitivity(&self) -> T;
    /// Whether output `t` depends on noise coordinates `<= t` only, which lets the
    /// mechanism sample noise lazily and serve adaptively chosen inputs.
    fn adaptive_safe(&self) -> bool;
    fn coefficients(&self) -> &[T];
}

/// Implicit complex pattern pair over the cyclic group of order `order`:
/// `L̃[i][j] = b[(j - i) mod order]` (`rows x order`) and
/// `R̃[j][k] = b[(k - j) mod order]` (`order x rows`).
///
/// `rows` is the requested horizon. It is smaller than `order / 2` only for striped specs
/// whose stride does not divide `n`, which are factorized at the rounded horizon and cut.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternFactorization<T> {
    pub rows: usize,
    pub order: usize,
    pub b_vals: Vec<Complex<T>>,
    /// `f(0..rows)`.
    pub coefficients: Vec<T>,
}

impl<T: Scalar> PatternFactorization<T> {
    fn b_at(&self, offset: isize) -> Complex<T> {
        self.b_vals[offset.rem_euclid(self.order as isize) as usize]
    }

    pub fn left_entry(&self, i: usize, j: usize) -> Complex<T> {
        self.b_at(j as isize - i as isize)
    }

    pub fn right_entry(&self, j: usize, k: usize) -> Complex<T> {
        self.b_at(k as isize - j as isize)
    }

    pub fn left_dense(&self) -> Matrix<Complex<T>> {
        Matrix::from_fn(self.rows, self.order, |i, j| self.left_entry(i, j))
    }

    pub fn right_dense(&self) -> Matrix<Complex<T>> {
        Matrix::from_fn(self.order, self.rows, |j, k| self.right_entry(j, k))
    }

    /// `Σ_m |b_m|²`: squared norm of every row of `L̃` and every column of `R̃`.
    pub fn row_energy(&self) -> T {
        self.b_vals.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn sensitivity(&self) -> T {
        self.row_energy().sqrt()
    }

    /// `Tr_p(L̃) ‖R̃‖_{1→2}`; all rows share one norm, so this is `rows^{1/p} Σ|b|²`.
    pub fn achieved(&self, p: PNorm) -> T {
        let e = self.row_energy();
        e * from_usize::<T>(self.rows).powf(lit(p.inv()))
    }

    pub fn max_imag(&self) -> T {
        self.b_vals.iter().fold(T::zero(), |m, v| m.max(v.im.abs()))
    }

    /// `L̃ R̃` as a real matrix (imaginary parts dropped; they vanish up to roundoff).
    pub fn product(&self) -> Matrix<T> {
        // (L̃R̃)[i][k] = Σ_j b[j-i] b[k-j]: the cyclic self-convolution of b at k - i.
        let conv: Vec<Complex<T>> = (0..self.order)
            .map(|d| {
                (0..self.order).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.b_vals[j] * self.b_at(d as isize - j as isize)
                })
            })
            .collect();
        Matrix::from_fn(self.rows, self.rows, |i, k| {
            conv[(k as isize - i as isize).rem_euclid(self.order as isize) as usize].re
        })
    }
}

/// Real embedding `Ĺ = [Re L̃ | Im L̃]`, `R̂ = [Re R̃ ; -Im R̃]`, or the thin pair
/// `(Re L̃, Re R̃)` when `b_vals` are real.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFactorization<T> {
    pub left: Matrix<T>,
    pub right: Matrix<T>,
    pub thin: bool,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> RealFactorization<T> {
    pub fn sensitivity(&self) -> T {
        col_norm(&self.right)
    }

    pub fn achieved(&self, p: PNorm) -> T {
        trace_p_from_row_norms(&row_norms(&self.left), p) * self.sensitivity()
    }
}

impl<T: Scalar> NoiseShape<T> for RealFactorization<T> {
    fn left(&self) -> &Matrix<T> {
        &self.left
    }

    fn sensitivity(&self) -> T {
        RealFactorization::sensitivity(self)
    }

    fn adaptive_safe(&self) -> bool {
        false
    }

    fn coefficients(&self) -> &[T] {
        &self.coefficients
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangularFactorization<T> {
    /// Lower-triangular `n x n`.
    pub left: Matrix<T>,
    pub right: Matrix<T>,
    /// `‖R‖_{1→2}`.
    pub sensitivity: T,
    /// Diagonal of `L Lᵀ`, the squared row norms of `L`.
    pub trace_profile: Vec<T>,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> TriangularFactorization<T> {
    fn assemble(left: Matrix<T>, right: Matrix<T>, coefficients: Vec<T>) -> Self {
        let trace_profile = row_norms(&left).iter().map(|&r| r * r).collect();
        let sensitivity = col_norm(&right);
        Self {
            left,
            right,
            sensitivity,
            trace_profile,
            coefficients,
        }
    }

    pub fn n(&self) -> usize {
        self.left.rows()
    }

    pub fn trace_p(&self, p: PNorm) -> T {
        let norms: Vec<T> = self.trace_profile.iter().map(|v| v.sqrt()).collect();
        trace_p_from_row_norms(&norms, p)
    }

    pub fn achieved(&self, p: PNorm) -> T {
        self.trace_p(p) * self.sensitivity
    }

    /// Leading `k x k` blocks. Because `L` is lower-triangular they still multiply to
    /// the leading block of `M_f`.
    pub fn truncate(&self, k: usize) -> Self {
        assert!(k <= self.n(), "cannot grow a factorization");
        Self::assemble(
            self.left.block(k, k),
            self.right.block(k, k),
            self.coefficients[..k].to_vec(),
        )
    }
}

impl<T: Scalar> NoiseShape<T> for TriangularFactorization<T> {
    fn left(&self) -> &Matrix<T> {
        &self.left
    }

    fn sensitivity(&self) -> T {
        self.sensitivity
    }

    fn adaptive_safe(&self) -> bool {
        true
    }

    fn coefficients(&self) -> &[T] {
        &self.coefficients
    }
}

pub fn build_pattern<T: Scalar>(profile: &RootsProfile<T>, coefficients: &[T]) -> PatternFactorization<T> {
    assert!(coefficients.len() <= profile.n, "more rows than the profile horizon");
    PatternFactorization {
        rows: coefficients.len(),
        order: profile.order(),
        b_vals: profile.b_vals.clone(),
        coefficients: coefficients.to_vec(),
    }
}

pub fn realify<T: Scalar>(p: &PatternFactorization<T>) -> RealFactorization<T> {
    let (n, order) = (p.rows, p.order);
    let thin = p.max_imag() < lit(THIN_TOLERANCE);
    let (left, right) = if thin {
        (
            Matrix::from_fn(n, order, |i, j| p.left_entry(i, j).re),
            Matrix::from_fn(order, n, |j, k| p.right_entry(j, k).re),
        )
    } else {
        (
            Matrix::from_fn(n, 2 * order, |i, j| {
                if j < order {
                    p.left_entry(i, j).re
                } else {
                    p.left_entry(i, j - order).im
                }
            }),
            Matrix::from_fn(2 * order, n, |j, k| {
                if j < order {
                    p.right_entry(j, k).re
                } else {
                    -p.right_entry(j - order, k).im
                }
            }),
        )
    };
    RealFactorization {
        left,
        right,
        thin,
        coefficients: p.coefficients.clone(),
    }
}

/// `Ĺᵀ = Q T`, `L = Tᵀ`, `R = Qᵀ R̂`.
pub fn triangularize<T: Scalar>(r: &RealFactorization<T>) -> Result<TriangularFactorization<T>> {
    let (n, w) = r.left.shape();
    if !r.left.is_finite() || !r.right.is_finite() {
        return Err(Error::Numeric("non-finite entry in real factors".into()));
    }
    // row-major Ĺ is column-major Ĺᵀ
    let qr = HouseholderQr::new(r.left.as_slice().to_vec(), w, n)?;
    let left = qr.t().transpose();
    let right = qr.apply_qt(r.right.transpose().into_vec(), n);
    Ok(TriangularFactorization::assemble(left, right, r.coefficients.clone()))
}

/// Pattern stage for a spec, including the striped round-up-and-cut.
pub fn pattern<T: Scalar>(spec: &WeightSpec) -> Result<PatternFactorization<T>> {
    let profile = RootsProfile::<T>::from_spec(spec)?;
    Ok(build_pattern(&profile, &spec.coefficients::<T>()))
}

pub fn real<T: Scalar>(spec: &WeightSpec) -> Result<RealFactorization<T>> {
    Ok(realify(&pattern::<T>(spec)?))
}

pub fn triangular<T: Scalar>(spec: &WeightSpec) -> Result<TriangularFactorization<T>> {
    triangular_capped(spec, TRIANGULAR_CAP)
}

pub fn triangular_capped<T: Scalar>(spec: &WeightSpec, cap: usize) -> Result<TriangularFactorization<T>> {
    if spec.n > cap {
        return Err(Error::Capacity { n: spec.n, cap });
    }
    triangularize(&real::<T>(spec)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factorization<T> {
    Pattern(PatternFactorization<T>),
    Triangular(TriangularFactorization<T>),
}

impl<T: Scalar> Factorization<T> {
    pub fn achieved(&self, p: PNorm) -> T {
        match self {
            Factorization::Pattern(f) => f.achieved(p),
            Factorization::Triangular(f) => f.achieved(p),
        }
    }

    pub fn sensitivity(&self) -> T {
        match self {
            Factorization::Pattern(f) => f.sensitivity(),
            Factorization::Triangular(f) => f.sensitivity,
        }
    }
}

pub fn factorize<T: Scalar>(spec: &WeightSpec, mode: Mode) -> Result<Factorization<T>> {
    Ok(match mode {
        Mode::Pattern => Factorization::Pattern(pattern(spec)?),
        Mode::Triangular => Factorization::Triangular(triangular(spec)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(l: &Matrix<f64>, r: &Matrix<f64>, spec: &WeightSpec) -> f64 {
        let m = spec.build_matrix::<f64>().unwrap().entries;
        l.matmul(r).max_abs_diff(&m)
    }

    #[test]
    fn counting_one() {
        let spec = WeightSpec::counting(1).unwrap();
        let p = pattern::<f64>(&spec).unwrap();
        assert!((p.b_vals[0].re - 1.0).abs() < 1e-15 && p.b_vals[1].norm() < 1e-15);
        let t = triangular::<f64>(&spec).unwrap();
        assert!((t.left[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((t.right[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counting_two_pattern_entries() {
        let p = pattern::<f64>(&WeightSpec::counting(2).unwrap()).unwrap();
        let b: Vec<f64> = p.b_vals.iter().map(|v| v.re).collect();
        let upper = 2.0 * (b[0] * b[1] + b[2] * b[3]);
        let diag = b[0] * b[0] + 2.0 * b[1] * b[3] + b[2] * b[2];
        assert!(upper.abs() < 1e-12 && (diag - 1.0).abs() < 1e-12);
        let prod = p.product();
        assert!((prod[(0, 1)]).abs() < 1e-12 && (prod[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn realify_thin_and_full() {
        let r = real::<f64>(&WeightSpec::counting(2).unwrap()).unwrap();
        assert!(r.thin);
        assert_eq!(r.left.shape(), (2, 4));

        let spec = WeightSpec::table(2, vec![0.0, 1.0]).unwrap();
        let p = pattern::<f64>(&spec).unwrap();
        let prof = RootsProfile::<f64>::from_spec(&spec).unwrap();
        assert!((prof.zeta[2] - Complex::new(0.0, 1.0)).norm() < 1e-15);
        let r = realify(&p);
        assert!(!r.thin);
        assert_eq!(r.left.shape(), (2, 8));
        assert!(residual(&r.left, &r.right, &spec) < 1e-12);

        let zero = WeightSpec::table(3, vec![]).unwrap();
        let r = real::<f64>(&zero).unwrap();
        assert_eq!(r.left.max_abs(), 0.0);
        assert_eq!(r.left.matmul(&r.right).max_abs(), 0.0);
    }

    #[test]
    fn triangular_examples() {
        for spec in [
            WeightSpec::counting(2).unwrap(),
            WeightSpec::striped(4, 2).unwrap(),
            WeightSpec::sliding(9, 3).unwrap(),
            WeightSpec::table(5, vec![0.0, 1.0, -0.5]).unwrap(),
        ] {
            let t = triangular::<f64>(&spec).unwrap();
            assert!(t.left.is_lower_triangular());
            assert!(residual(&t.left, &t.right, &spec) < 1e-12, "{}", spec.id());
        }
        let t = triangular::<f64>(&WeightSpec::table(4, vec![]).unwrap()).unwrap();
        assert_eq!(t.left.max_abs(), 0.0);
        assert_eq!(t.right.max_abs(), 0.0);
    }

    #[test]
    fn striped_non_divisible_is_cut() {
        let spec = WeightSpec::striped(10, 4).unwrap();
        let p = pattern::<f64>(&spec).unwrap();
        assert_eq!((p.rows, p.order), (10, 24));
        let t = triangular::<f64>(&spec).unwrap();
        assert_eq!(t.left.shape(), (10, 10));
        assert!(residual(&t.left, &t.right, &spec) < 1e-12);
    }

    #[test]
    fn sliding_one_is_identity() {
        let spec = WeightSpec::sliding(7, 1).unwrap();
        let p = pattern::<f64>(&spec).unwrap();
        assert!((p.achieved(PNorm::Infinity) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn capacity_is_enforced() {
        let spec = WeightSpec::counting(20).unwrap();
        assert!(matches!(
            triangular_capped::<f64>(&spec, 16),
            Err(Error::Capacity { n: 20, cap: 16 })
        ));
        assert!("bogus".parse::<Mode>().is_err());
    }

    #[test]
    fn truncation_keeps_reconstruction() {
        let spec = WeightSpec::poly_decay(12, 1.0).unwrap();
        let t = triangular::<f64>(&spec).unwrap().truncate(7);
        assert!(residual(&t.left, &t.right, &spec.with_n(7).unwrap()) < 1e-12);
    }
}
