//! Explicit factorizations `M_f = L R` of lower-triangular Toeplitz workloads
//! `M_f[i][j] = f(i - j)`, built from the values of the weight polynomial at the 2n-th
//! roots of unity, together with bounds on their factorization norms and a Gaussian
//! streaming mechanism that adds correlated noise `L z`.
//!
//! The numeric core is generic over [`Scalar`] (`f32`, `f64`). The aliases at the crate
//! root fix it to `f64`, which is what the bounds, mechanism and evaluator use.

pub mod error;
pub mod evaluator;
pub mod factorizer;
pub mod io;
pub mod matrix;
pub mod mechanism;
pub mod norms;
pub mod oracle;
pub mod polyeval;
pub mod qr;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use evaluator::{ErrorReport, DEFAULT_TRIALS};
pub use mechanism::{PrivacyParams, SigmaVariant, StreamState};
pub use factorizer::{factorize, Factorization as GenericFactorization, Mode, NoiseShape};
pub use norms::{BoundReport, PNorm};
pub use scalar::Scalar;
pub use weights::{WeightFamily, WeightSpec};

pub type Matrix = matrix::Matrix<f64>;
pub type Workload = weights::Workload<f64>;
pub type RootsProfile = polyeval::RootsProfile<f64>;
pub type PatternFactorization = factorizer::PatternFactorization<f64>;
pub type RealFactorization = factorizer::RealFactorization<f64>;
pub type TriangularFactorization = factorizer::TriangularFactorization<f64>;
pub type Factorization = factorizer::Factorization<f64>;

pub type Matrix32 = matrix::Matrix<f32>;
pub type RootsProfile32 = polyeval::RootsProfile<f32>;
pub type TriangularFactorization32 = factorizer::TriangularFactorization<f32>;
