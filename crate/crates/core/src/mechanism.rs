//! Gaussian streaming mechanism: output `(M x)_t + (L z)_t` for one persistent noise
//! vector `z` with per-coordinate standard deviation `σ ‖R‖_{1→2}`.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::factorizer::NoiseShape;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaVariant {
    /// `(2Δ/ε) √ln(1.25/δ)`
    #[serde(rename = "thm15")]
    Classic,
    /// `Δ (2/ε) √(4/9 + ln((1/δ)√(2/π)))`
    #[serde(rename = "def28")]
    Tight,
}

impl FromStr for SigmaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm15" => Ok(SigmaVariant::Classic),
            "def28" => Ok(SigmaVariant::Tight),
            other => Err(Error::Parameter(format!("unknown sigma variant `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub clip: f64,
    pub variant: SigmaVariant,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, clip: f64, variant: SigmaVariant) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return param(format!("epsilon {epsilon} must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return param(format!("delta {delta} outside (0, 1)"));
        }
        if !(clip.is_finite() && clip > 0.0) {
            return param(format!("clip {clip} must be positive"));
        }
        Ok(Self {
            epsilon,
            delta,
            clip,
            variant,
        })
    }

    pub fn sigma(&self) -> f64 {
        let (e, d, c) = (self.epsilon, self.delta, self.clip);
        match self.variant {
            SigmaVariant::Classic => 2.0 * c / e * (1.25 / d).ln().sqrt(),
            SigmaVariant::Tight => {
                let inner = 4.0 / 9.0 + ((2.0 / std::f64::consts::PI).sqrt() / d).ln();
                c * 2.0 / e * inner.sqrt()
            }
        }
    }
}

/// SplitMix64 finalizer, used to spread `seed ^ index` into well-mixed stream seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ trial)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `std * N(0, 1)` draws.
pub fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize, std: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            std * g
        })
        .collect()
}

pub fn clip_value(x: f64, clip: f64) -> f64 {
    x.clamp(-clip, clip)
}

/// `R clip(x)`: what a neighbouring stream can change by at most `2Δ ‖R‖_{1→2}`.
pub fn encode(right: &Matrix<f64>, x: &[f64], clip: f64) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|&v| clip_value(v, clip)).collect();
    right.matvec(&clipped)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub input: f64,
    pub clipped: bool,
    /// `Σ_{i<=t} f(t-i) x_i` over the clipped inputs.
    pub true_value: f64,
    /// `⟨L[t, :], z⟩`.
    pub noise: f64,
    pub output: f64,
}

pub struct StreamState<'a, S: NoiseShape<f64>> {
    shape: &'a S,
    n: usize,
    clip: f64,
    noise_std: f64,
    inputs: Vec<f64>,
    z: Vec<f64>,
    rng: ChaCha8Rng,
    lazy: bool,
    clipped: usize,
}

impl<'a, S: NoiseShape<f64>> StreamState<'a, S> {
    pub fn init(shape: &'a S, params: &PrivacyParams, seed: u64) -> Result<Self> {
        let std = params.sigma() * shape.sensitivity();
        Self::with_noise_std(shape, std, params.clip, seed)
    }

    /// Explicit per-coordinate noise scale; `0` turns the noise off.
    pub fn with_noise_std(shape: &'a S, noise_std: f64, clip: f64, seed: u64) -> Result<Self> {
        let left = shape.left();
        let n = left.rows();
        if shape.coefficients().len() != n {
            return param(format!(
                "factor has {n} rows but {} weights",
                shape.coefficients().len()
            ));
        }
        if !(noise_std.is_finite() && noise_std >= 0.0) {
            return Err(Error::Numeric(format!("noise scale {noise_std} is not usable")));
        }
        let lazy = shape.adaptive_safe();
        if lazy && left.cols() != n {
            return param("lazily sampled noise needs a square lower-triangular left factor");
        }
        let mut rng = rng_for(seed);
        let z = if lazy {
            Vec::with_capacity(n)
        } else {
            gaussian_vector(&mut rng, left.cols(), noise_std)
        };
        Ok(Self {
            shape,
            n,
            clip,
            noise_std,
            inputs: Vec::with_capacity(n),
            z,
            rng,
            lazy,
            clipped: 0,
        })
    }

    pub fn t(&self) -> usize {
        self.inputs.len()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    /// Noise coordinates drawn so far.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn clipped_count(&self) -> usize {
        self.clipped
    }

    pub fn adaptive_safe(&self) -> bool {
        self.lazy
    }

    pub fn step(&mut self, x: f64) -> Result<StepRecord> {
        let t = self.inputs.len();
        if t >= self.n {
            return Err(Error::State(format!("stream of length {} is exhausted", self.n)));
        }
        if !x.is_finite() {
            return param(format!("input {x} at step {t} is not finite"));
        }
        let v = clip_value(x, self.clip);
        let clipped = v != x;
        self.clipped += clipped as usize;
        self.inputs.push(v);

        if self.lazy {
            let g: f64 = StandardNormal.sample(&mut self.rng);
            self.z.push(self.noise_std * g);
        }
        let f = self.shape.coefficients();
        let true_value = (0..=t).fold(0.0, |acc, i| acc + f[t - i] * self.inputs[i]);
        let row = self.shape.left().row(t);
        let noise = row.iter().zip(&self.z).fold(0.0, |acc, (&l, &z)| acc + l * z);
        Ok(StepRecord {
            t,
            input: x,
            clipped,
            true_value,
            noise,
            output: true_value + noise,
        })
    }
}

/// Feed a whole stream; returns one record per step.
pub fn run_records<S: NoiseShape<f64>>(
    shape: &S,
    params: &PrivacyParams,
    x: &[f64],
    seed: u64,
) -> Result<Vec<StepRecord>> {
    let mut state = StreamState::init(shape, params, seed)?;
    x.iter().map(|&v| state.step(v)).collect()
}

/// Noised outputs `a_0, ..., a_{n-1}`.
pub fn run<S: NoiseShape<f64>>(
    shape: &S,
    params: &PrivacyParams,
    x: &[f64],
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(run_records(shape, params, x, seed)?
        .into_iter()
        .map(|r| r.output)
        .collect())
}
