//! Weight functions `f` and the lower-triangular Toeplitz workloads `M[i][j] = f(i - j)`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{lit, Scalar};

/// Largest `n` for which dense `n x n` materialization is attempted.
pub const DEFAULT_DENSE_CAP: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    /// `f(k) = 1`: continual counting.
    Counting,
    /// `f(k) = 1` for `k < window`, else 0.
    Sliding { window: usize },
    /// `f(k) = 1` when `stride` divides `k`, else 0.
    Striped { stride: usize },
    /// `f(k) = alpha^k`.
    ExpDecay { alpha: f64 },
    /// `f(k) = (k + 1)^(-alpha)`.
    PolyDecay { alpha: f64 },
    /// Explicit values, zero-padded or truncated to the horizon.
    Table { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub family: WeightFamily,
    pub n: usize,
}

impl WeightSpec {
    pub fn new(family: WeightFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return param("horizon n must be at least 1");
        }
        match &family {
            WeightFamily::Counting => {}
            WeightFamily::Sliding { window } => {
                if *window == 0 || *window > n {
                    return param(format!("sliding window {window} outside 1..={n}"));
                }
            }
            WeightFamily::Striped { stride } => {
                if *stride == 0 || *stride > n {
                    return param(format!("stripe width {stride} outside 1..={n}"));
                }
            }
            WeightFamily::ExpDecay { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0) {
                    return param(format!("exponential decay alpha {alpha} outside (0, 1]"));
                }
            }
            WeightFamily::PolyDecay { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return param(format!("polynomial decay alpha {alpha} must be positive"));
                }
            }
            WeightFamily::Table { values } => {
                if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                    return param(format!("table value {bad} is not finite"));
                }
            }
        }
        Ok(Self { family, n })
    }

    pub fn counting(n: usize) -> Result<Self> {
        Self::new(WeightFamily::Counting, n)
    }

    pub fn sliding(n: usize, window: usize) -> Result<Self> {
        Self::new(WeightFamily::Sliding { window }, n)
    }

    pub fn striped(n: usize, stride: usize) -> Result<Self> {
        Self::new(WeightFamily::Striped { stride }, n)
    }

    pub fn exp_decay(n: usize, alpha: f64) -> Result<Self> {
        Self::new(WeightFamily::ExpDecay { alpha }, n)
    }

    pub fn poly_decay(n: usize, alpha: f64) -> Result<Self> {
        Self::new(WeightFamily::PolyDecay { alpha }, n)
    }

    pub fn table(n: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(WeightFamily::Table { values }, n)
    }

    /// Short stable identifier used in reports and file names.
    pub fn id(&self) -> String {
        match &self.family {
            WeightFamily::Counting => "counting".to_string(),
            WeightFamily::Sliding { window } => format!("sliding(W={window})"),
            WeightFamily::Striped { stride } => format!("striped(b={stride})"),
            WeightFamily::ExpDecay { alpha } => format!("expdecay(alpha={alpha})"),
            WeightFamily::PolyDecay { alpha } => format!("polydecay(alpha={alpha})"),
            WeightFamily::Table { values } => format!("table(len={})", values.len()),
        }
    }

    /// Same family at a different horizon.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.family.clone(), n)
    }

    /// Horizon the factorization is computed at. Striped specs whose stride does not
    /// divide `n` are rounded up to the next multiple of the stride.
    pub fn factor_horizon(&self) -> usize {
        match self.family {
            WeightFamily::Striped { stride } => self.n.div_ceil(stride) * stride,
            _ => self.n,
        }
    }

    /// True when some weight is negative, i.e. the weights lie outside the
    /// non-negative class the upper bound is stated for.
    pub fn has_negative_weights(&self) -> bool {
        match &self.family {
            WeightFamily::Table { values } => values.iter().take(self.n).any(|&v| v < 0.0),
            _ => false,
        }
    }

    /// `f(0), ..., f(n - 1)`.
    pub fn coefficients<T: Scalar>(&self) -> Vec<T> {
        self.coefficients_to(self.n)
    }

    /// `f(0), ..., f(len - 1)` for an arbitrary length (used for rounded horizons).
    pub fn coefficients_to<T: Scalar>(&self, len: usize) -> Vec<T> {
        (0..len).map(|k| self.weight(k)).collect()
    }

    fn weight<T: Scalar>(&self, k: usize) -> T {
        match &self.family {
            WeightFamily::Counting => T::one(),
            WeightFamily::Sliding { window } => indicator(k < *window),
            WeightFamily::Striped { stride } => indicator(k % stride == 0),
            WeightFamily::ExpDecay { alpha } => lit::<T>(*alpha).powi(k as i32),
            WeightFamily::PolyDecay { alpha } => lit::<T>((k + 1) as f64).powf(-lit::<T>(*alpha)),
            WeightFamily::Table { values } => values.get(k).map_or(T::zero(), |&v| lit(v)),
        }
    }

    pub fn build_matrix<T: Scalar>(&self) -> Result<Workload<T>> {
        self.build_matrix_capped(DEFAULT_DENSE_CAP)
    }

    pub fn build_matrix_capped<T: Scalar>(&self, cap: usize) -> Result<Workload<T>> {
        if self.n > cap {
            return Err(Error::Capacity { n: self.n, cap });
        }
        Ok(Workload::from_coefficients(&self.coefficients::<T>()))
    }
}

fn indicator<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// Lower-triangular Toeplitz workload matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Workload<T> {
    pub n: usize,
    pub entries: Matrix<T>,
}

impl<T: Scalar> Workload<T> {
    pub fn from_coefficients(f: &[T]) -> Self {
        let n = f.len();
        let entries = Matrix::from_fn(n, n, |i, j| if i >= j { f[i - j] } else { T::zero() });
        Self { n, entries }
    }

    /// Exact weighted sums `(M x)_t`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.entries.matvec(x)
    }
}
