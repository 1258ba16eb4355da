//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real floating-point type the factorization pipeline can run on.
///
/// Implemented for `f32` and `f64`. All tolerances quoted in the docs assume `f64`.
pub trait Scalar:
    Float + FloatConst + FftNum + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from(x).expect("finite literal representable in scalar type")
}

/// Converts an index or count into the working scalar.
#[inline]
pub fn from_usize<T: Scalar>(x: usize) -> T {
    T::from(x).expect("count representable in scalar type")
}

/// Pairwise (cascade) summation; result depends only on the order of `values`.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
