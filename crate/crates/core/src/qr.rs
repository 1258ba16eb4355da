//! Householder QR on a column-major buffer.
//!
//! The factorizer hands in `Ĺᵀ`. Its columns are the rows of `Ĺ`, so the row-major
//! storage of `Ĺ` is already the column-major storage of `Ĺᵀ` and no copy is needed.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// `A = Q T` for a tall `rows x cols` matrix. `Q` is kept implicitly as reflectors.
#[derive(Clone, Debug)]
pub struct HouseholderQr<T> {
    rows: usize,
    cols: usize,
    /// Unit vector `v_k` acting on coordinates `k..rows`, or `None` for a skipped step.
    reflectors: Vec<Option<Vec<T>>>,
    /// Upper-triangular `cols x cols` factor, diagonal made non-negative.
    t: Matrix<T>,
    /// `+1` or `-1` per column of `Q`, absorbed from the diagonal sign fix.
    signs: Vec<T>,
}

/// Apply `I - 2 v vᵀ` to the tail `col[k..]`.
fn reflect<T: Scalar>(v: &[T], tail: &mut [T]) {
    let dot: T = v.iter().zip(tail.iter()).map(|(&a, &b)| a * b).sum();
    if dot == T::zero() {
        return;
    }
    let s = dot + dot;
    for (x, &vi) in tail.iter_mut().zip(v) {
        *x = *x - s * vi;
    }
}

impl<T: Scalar> HouseholderQr<T> {
    /// Factor the `rows x cols` matrix stored column by column in `data`.
    pub fn new(mut data: Vec<T>, rows: usize, cols: usize) -> Result<Self> {
        assert_eq!(data.len(), rows * cols, "buffer does not match shape");
        if rows < cols {
            return Err(Error::Parameter(format!(
                "QR needs a tall matrix, got {rows} x {cols}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite entry in QR input".into()));
        }
        let mut reflectors = Vec::with_capacity(cols);
        let mut t = Matrix::zeros(cols, cols);

        for k in 0..cols {
            let (head, rest) = data.split_at_mut((k + 1) * rows);
            let col = &mut head[k * rows..];
            let x = &col[k..];
            let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let norm = if scale == T::zero() {
                T::zero()
            } else {
                scale * x.iter().map(|&v| (v / scale) * (v / scale)).sum::<T>().sqrt()
            };

            let tail_norm = if x.len() > 1 {
                x[1..].iter().fold(T::zero(), |m, v| m.max(v.abs()))
            } else {
                T::zero()
            };
            if norm == T::zero() || tail_norm == T::zero() {
                // already upper-triangular in this column
                reflectors.push(None);
                t[(k, k)] = col[k];
            } else {
                let alpha = if x[0] >= T::zero() { -norm } else { norm };
                let mut v: Vec<T> = x.to_vec();
                v[0] = v[0] - alpha;
                let vnorm = v.iter().map(|&a| a * a).sum::<T>().sqrt();
                for a in v.iter_mut() {
                    *a = *a / vnorm;
                }
                col[k] = alpha;
                for c in col[k + 1..].iter_mut() {
                    *c = T::zero();
                }
                t[(k, k)] = alpha;
                rest.par_chunks_mut(rows)
                    .for_each(|other| reflect(&v, &mut other[k..]));
                reflectors.push(Some(v));
            }
            for j in k + 1..cols {
                t[(k, j)] = data[j * rows + k];
            }
        }

        let mut signs = vec![T::one(); cols];
        for (k, s) in signs.iter_mut().enumerate() {
            if t[(k, k)] < T::zero() {
                *s = -T::one();
                for v in t.row_mut(k) {
                    *v = -*v;
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            reflectors,
            t,
            signs,
        })
    }

    pub fn t(&self) -> &Matrix<T> {
        &self.t
    }

    /// `Qᵀ B` for a `rows x m` matrix `B` given column-major; returns the `cols x m`
    /// result row-major.
    pub fn apply_qt(&self, mut data: Vec<T>, m: usize) -> Matrix<T> {
        assert_eq!(data.len(), self.rows * m, "buffer does not match shape");
        let rows = self.rows;
        data.par_chunks_mut(rows).for_each(|col| {
            for (k, v) in self.reflectors.iter().enumerate() {
                if let Some(v) = v {
                    reflect(v, &mut col[k..]);
                }
            }
        });
        Matrix::from_fn(self.cols, m, |i, j| self.signs[i] * data[j * rows + i])
    }
}
