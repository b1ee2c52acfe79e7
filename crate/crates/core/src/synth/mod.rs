//! Validation signals with known scaling exponents.
//!
//! Fractional Gaussian noise is drawn exactly by circulant embedding of its
//! autocovariance `g(k) = 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H)`.

mod order_flow;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use order_flow::{
    synth_order_flow, DurationSource, OrderFlowSpec, SyntheticDay,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("circulant embedding has negative eigenvalues after {doublings} doublings")]
    EmbeddingFailure { doublings: usize },
    #[error("invalid order-flow shape: {0}")]
    InvalidShapeParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    White,
    /// Cumulative sum of white noise; DFA targets 1.5.
    BrownianIncrementsIntegrated,
    Fgn,
}

impl std::str::FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "white" => Ok(SignalKind::White),
            "brownian" | "integrated" => Ok(SignalKind::BrownianIncrementsIntegrated),
            "fgn" => Ok(SignalKind::Fgn),
            other => Err(format!("unknown signal kind `{other}` (white|brownian|fgn)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: SignalKind,
    /// Hurst exponent, used by `Fgn` only.
    pub hurst: f64,
    pub length: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn white(length: usize, seed: u64) -> Self {
        Self {
            kind: SignalKind::White,
            hurst: 0.5,
            length,
            seed,
        }
    }

    pub fn brownian(length: usize, seed: u64) -> Self {
        Self {
            kind: SignalKind::BrownianIncrementsIntegrated,
            hurst: 0.5,
            length,
            seed,
        }
    }

    pub fn fgn(hurst: f64, length: usize, seed: u64) -> Self {
        Self {
            kind: SignalKind::Fgn,
            hurst,
            length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.length < 2 {
            return Err(SynthError::InvalidSpec(format!(
                "length {} must be at least 2",
                self.length
            )));
        }
        if self.kind == SignalKind::Fgn && !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(SynthError::InvalidSpec(format!(
                "Hurst exponent {} must lie in (0, 1)",
                self.hurst
            )));
        }
        Ok(())
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-item seed derived from a run seed; stable across runs.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Vec<f64>, SynthError> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    match spec.kind {
        SignalKind::White => Ok(white_noise(spec.length, &mut rng)),
        SignalKind::BrownianIncrementsIntegrated => {
            let mut acc = 0.0;
            Ok(white_noise(spec.length, &mut rng)
                .into_iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect())
        }
        SignalKind::Fgn => Ok(FgnGenerator::new(spec.hurst, spec.length)?.sample(&mut rng)),
    }
}

pub fn white_noise<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Exact fGn autocovariance at integer lag `k` (unit variance).
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Reusable circulant-embedding sampler for one `(H, n)` pair.
pub struct FgnGenerator {
    n: usize,
    /// sqrt(eigenvalue / embedding size), one per frequency.
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FgnGenerator {
    const MAX_DOUBLINGS: usize = 3;

    pub fn new(hurst: f64, n: usize) -> Result<Self, SynthError> {
        GeneratorSpec::fgn(hurst, n, 0).validate()?;
        let mut half = n.next_power_of_two();
        let mut planner = FftPlanner::new();
        for doubling in 0..=Self::MAX_DOUBLINGS {
            let size = 2 * half;
            let mut row = vec![Complex64::new(0.0, 0.0); size];
            for (k, c) in row.iter_mut().enumerate().take(half + 1) {
                c.re = fgn_autocovariance(hurst, k);
            }
            for k in 1..half {
                row[size - k].re = row[k].re;
            }
            let fft = planner.plan_fft_forward(size);
            fft.process(&mut row);
            let max = row.iter().map(|c| c.re).fold(0.0f64, f64::max);
            let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
            if min < -1e-10 * max {
                log::debug!("fGn embedding of size {size} has min eigenvalue {min}; doubling");
                if doubling == Self::MAX_DOUBLINGS {
                    break;
                }
                half *= 2;
                continue;
            }
            let weights = row
                .iter()
                .map(|c| (c.re.max(0.0) / size as f64).sqrt())
                .collect();
            return Ok(Self { n, weights, fft });
        }
        Err(SynthError::EmbeddingFailure {
            doublings: Self::MAX_DOUBLINGS,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .weights
            .iter()
            .map(|w| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(w * re, w * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.n);
        buf.into_iter().map(|c| c.re).collect()
    }
}
