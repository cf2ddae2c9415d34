//! Gaussian field samplers sharing one reproducible stream-keyed RNG scheme:
//! a spherical-harmonic expansion sampler on S², a stationary space-time
//! sampler, a dense-factorization sampler for arbitrary point sets, and the
//! product-form expansion used purely as a verification device.

mod kl;
mod literal;
mod spacetime;

pub use kl::sample_kl_sphere;
pub use literal::{literal_formula_value, verify_literal_expansion, LiteralReport};
pub use spacetime::sample_spacetime;

use crate::covariance::CovMatrix;
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Seed and stream id addressing a family of independent random streams.
/// Identical (seed, stream) reproduces identical output bit-exactly on the
/// same build, independent of thread scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for a (replicate, degree) cell of the stream family:
/// the four coordinates are absorbed into a splitmix64 chain whose output
/// keys a ChaCha12 generator.
pub fn stream_rng(spec: &RngSpec, replicate: u64, degree: u64) -> ChaCha12Rng {
    let mut state = spec.seed;
    for v in [spec.stream, replicate, degree] {
        let mut vs = v.wrapping_add(0xA076_1D64_78BD_642F);
        state ^= splitmix64(&mut vs);
        splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

#[inline]
pub(crate) fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Which backend produced a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SampleMethod {
    Kl,
    Cholesky,
    SpacetimeKl,
    LiteralTxt,
}

impl std::fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SampleMethod::Kl => "KL",
            SampleMethod::Cholesky => "CHOLESKY",
            SampleMethod::SpacetimeKl => "SPACETIME_KL",
            SampleMethod::LiteralTxt => "LITERAL_TXT",
        };
        f.write_str(s)
    }
}

/// Replicated field values over a point set (optionally crossed with a time
/// grid), stored row-major per replicate; spatio-temporal columns are
/// point-major then time.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub n_points: usize,
    pub times: Option<Vec<f64>>,
    pub replicates: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub truncation_l: u64,
    pub method: SampleMethod,
    pub jitter_added: f64,
}

impl FieldSample {
    /// Columns per replicate: points × times.
    pub fn n_cols(&self) -> usize {
        self.n_points * self.times.as_ref().map_or(1, Vec::len)
    }

    pub fn row(&self, replicate: usize) -> &[f64] {
        let w = self.n_cols();
        &self.values[replicate * w..(replicate + 1) * w]
    }

    /// Value at (replicate, point) for spatial samples.
    pub fn value(&self, replicate: usize, point: usize) -> f64 {
        self.row(replicate)[point]
    }

    /// Value at (replicate, point, time index) for spatio-temporal samples.
    pub fn value_at(&self, replicate: usize, point: usize, time_idx: usize) -> f64 {
        let nt = self.times.as_ref().map_or(1, Vec::len);
        self.row(replicate)[point * nt + time_idx]
    }

    pub(crate) fn check_finite(self) -> Result<Self> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(self)
        } else {
            Err(Error::Domain("sample produced non-finite values".into()))
        }
    }
}

/// Draw `replicates` zero-mean Gaussian vectors with the covariance held by
/// `cov` (its jitter policy already applied): each row is factor · z with z
/// standard normal from the replicate's own stream.
pub fn sample_cholesky(cov: &CovMatrix, replicates: usize, rng: RngSpec) -> Result<FieldSample> {
    if replicates == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    let factor = cov.cholesky_lower()?;
    let n = cov.dim();
    let mut values = vec![0.0f64; replicates * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(r, row)| {
            let mut g = stream_rng(&rng, r as u64, 0);
            let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut g)).collect();
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..=i {
                    acc += factor[(i, j)] * z[j];
                }
                row[i] = acc;
            }
        });
    FieldSample {
        n_points: n,
        times: None,
        replicates,
        values,
        seed: rng.seed,
        truncation_l: 0,
        method: SampleMethod::Cholesky,
        jitter_added: cov.jitter_added,
    }
    .check_finite()
}
