//! Truncated spherical-harmonic expansion sampler on S²: independent
//! N(0, v_ℓ) coefficients per replicate combined against a precomputed
//! harmonic table.

use super::{standard_normal, stream_rng, FieldSample, RngSpec, SampleMethod};
use crate::error::{Error, Result};
use crate::specfun::{sph_harm_count, sph_harm_table, SpherePoint};
use crate::spectrum::{degree_variances, AngularPowerSpectrum};
use rayon::prelude::*;

/// Harmonic values for all degrees ≤ l_max at every point, laid out
/// [harmonic index][point] for cache-friendly accumulation.
pub(crate) fn harmonic_matrix(points: &[SpherePoint], l_max: u64) -> Result<Vec<f64>> {
    let np = points.len();
    let nidx = sph_harm_count(l_max);
    let mut mat = vec![0.0f64; nidx * np];
    for (p, pt) in points.iter().enumerate() {
        if pt.sphere_dim() != 2 {
            return Err(Error::Domain(
                "harmonic expansion needs points on S² (three coordinates)".into(),
            ));
        }
        let c = pt.coords();
        let theta = c[2].clamp(-1.0, 1.0).acos();
        let phi = c[1].atan2(c[0]);
        let table = sph_harm_table(l_max, theta, phi)?;
        for (idx, &y) in table.iter().enumerate() {
            mat[idx * np + p] = y;
        }
    }
    Ok(mat)
}

/// Sample the degree-truncated expansion T(x) = Σ_{ℓ≤L} Σ_m a_{ℓm} Y_{ℓm}(x)
/// with independent a_{ℓm} ~ N(0, v_ℓ); the output covariance is the
/// L-truncated series, off by at most scale·A_{L+1} from the full model.
pub fn sample_kl_sphere(
    spec: &AngularPowerSpectrum,
    l_max: u64,
    points: &[SpherePoint],
    replicates: usize,
    rng: RngSpec,
) -> Result<FieldSample> {
    spec.ensure_normalized()?;
    if spec.lambda().dimension() != Some(2) {
        return Err(Error::Domain(
            "harmonic sampling needs the S² index (dimension 2)".into(),
        ));
    }
    if points.is_empty() || replicates == 0 {
        return Err(Error::Config("points and replicates must be non-empty".into()));
    }
    let v = degree_variances(spec, l_max)?;
    let sd: Vec<f64> = v.iter().map(|x| x.sqrt()).collect();
    let ymat = harmonic_matrix(points, l_max)?;
    let np = points.len();
    let nidx = sph_harm_count(l_max);

    let mut values = vec![0.0f64; replicates * np];
    values.par_chunks_mut(np).enumerate().for_each(|(r, row)| {
        let mut coeffs = vec![0.0f64; nidx];
        let mut idx = 0;
        for (l, &s) in sd.iter().enumerate() {
            let mut g = stream_rng(&rng, r as u64, l as u64);
            for _ in 0..(2 * l + 1) {
                coeffs[idx] = s * standard_normal(&mut g);
                idx += 1;
            }
        }
        for (idx, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                let yrow = &ymat[idx * np..(idx + 1) * np];
                for (out, &y) in row.iter_mut().zip(yrow) {
                    *out += c * y;
                }
            }
        }
    });

    FieldSample {
        n_points: np,
        times: None,
        replicates,
        values,
        seed: rng.seed,
        truncation_l: l_max,
        method: SampleMethod::Kl,
        jitter_added: 0.0,
    }
    .check_finite()
}
