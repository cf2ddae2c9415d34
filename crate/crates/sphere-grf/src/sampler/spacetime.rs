//! Stationary space-time sampler: each harmonic coefficient follows an
//! independent stationary Gaussian time series with the degree's temporal
//! autocorrelation, so the output covariance is the truncated product of the
//! spatial series with φ_n(Δt).

use super::kl::harmonic_matrix;
use super::{standard_normal, stream_rng, FieldSample, RngSpec, SampleMethod};
use crate::covariance::{CovMatrix, JitterPolicy, SpaceTimeCovarianceModel, TemporalCf};
use crate::error::{Error, Result};
use crate::specfun::{sph_harm_count, SpherePoint};
use crate::spectrum::degree_variances;
use nalgebra::DMatrix;
use rayon::prelude::*;

fn temporal_key(cf: TemporalCf) -> (u8, u64) {
    match cf {
        TemporalCf::Gauss { b } => (0, b.to_bits()),
        TemporalCf::ExpDecay { b } => (1, b.to_bits()),
        TemporalCf::Rational { b } => (2, b.to_bits()),
    }
}

/// Sample T(x, t) = Σ_{ℓ≤L} Σ_m a_{ℓm}(t) Y_{ℓm}(x), where each a_{ℓm}(·) is
/// an independent zero-mean stationary Gaussian series with autocorrelation
/// φ_ℓ and variance v_ℓ·c_ℓ², realized exactly on the time grid by a dense
/// Toeplitz factorization of [φ_ℓ(t_i − t_j)].
pub fn sample_spacetime(
    model: &SpaceTimeCovarianceModel,
    l_max: u64,
    points: &[SpherePoint],
    times: &[f64],
    replicates: usize,
    rng: RngSpec,
) -> Result<FieldSample> {
    let spec = &model.spectrum;
    spec.ensure_normalized()?;
    if spec.lambda().dimension() != Some(2) {
        return Err(Error::Domain(
            "harmonic sampling needs the S² index (dimension 2)".into(),
        ));
    }
    if points.is_empty() || times.is_empty() || replicates == 0 {
        return Err(Error::Config(
            "points, times and replicates must be non-empty".into(),
        ));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Config("times must be strictly increasing".into()));
        }
    }
    if !times.iter().all(|t| t.is_finite()) {
        return Err(Error::Domain("times must be finite".into()));
    }

    let nt = times.len();
    let np = points.len();
    let v = degree_variances(spec, l_max)?;
    let ymat = harmonic_matrix(points, l_max)?;
    let nidx = sph_harm_count(l_max);

    // One Toeplitz Cholesky factor per distinct temporal kind.
    let mut factor_of_degree = vec![0usize; l_max as usize + 1];
    let mut factors: Vec<DMatrix<f64>> = Vec::new();
    let mut keys: Vec<(u8, u64)> = Vec::new();
    let mut jitter_max = 0.0f64;
    for l in 0..=l_max {
        let cf = model.temporal_at(l);
        let key = temporal_key(cf);
        let slot = match keys.iter().position(|&k| k == key) {
            Some(i) => i,
            None => {
                let mut t = DMatrix::<f64>::zeros(nt, nt);
                for i in 0..nt {
                    for j in 0..nt {
                        t[(i, j)] = cf.eval(times[i] - times[j]);
                    }
                }
                let cm = CovMatrix::from_matrix(t, JitterPolicy::Auto { max_jitter: 1e-6 })?;
                jitter_max = jitter_max.max(cm.jitter_added);
                factors.push(cm.cholesky_lower()?);
                keys.push(key);
                keys.len() - 1
            }
        };
        factor_of_degree[l as usize] = slot;
    }

    let mut values = vec![0.0f64; replicates * np * nt];
    values
        .par_chunks_mut(np * nt)
        .enumerate()
        .for_each(|(r, row)| {
            // Coefficient paths a_{ℓm}(t_j), laid out [harmonic idx][time].
            let mut coeff = vec![0.0f64; nidx * nt];
            let mut z = vec![0.0f64; nt];
            let mut idx = 0;
            for l in 0..=l_max as usize {
                let lt = &factors[factor_of_degree[l]];
                let amp = v[l].sqrt() * model.c_at(l as u64);
                let mut g = stream_rng(&rng, r as u64, l as u64);
                for _ in 0..(2 * l + 1) {
                    for zj in z.iter_mut() {
                        *zj = standard_normal(&mut g);
                    }
                    let path = &mut coeff[idx * nt..(idx + 1) * nt];
                    for i in 0..nt {
                        let mut acc = 0.0;
                        for j in 0..=i {
                            acc += lt[(i, j)] * z[j];
                        }
                        path[i] = amp * acc;
                    }
                    idx += 1;
                }
            }
            // row[p·nt + j] = Σ_idx coeff[idx][j] · Y[idx][p].
            for idx in 0..nidx {
                let path = &coeff[idx * nt..(idx + 1) * nt];
                let yrow = &ymat[idx * np..(idx + 1) * np];
                for (p, &y) in yrow.iter().enumerate() {
                    if y != 0.0 {
                        let out = &mut row[p * nt..(p + 1) * nt];
                        for (o, &c) in out.iter_mut().zip(path) {
                            *o += y * c;
                        }
                    }
                }
            }
        });

    FieldSample {
        n_points: np,
        times: Some(times.to_vec()),
        replicates,
        values,
        seed: rng.seed,
        truncation_l: l_max,
        method: SampleMethod::SpacetimeKl,
        jitter_added: jitter_max,
    }
    .check_finite()
}
