//! Empirical diagnostics on simulated fields: even increment moments against
//! the Gaussian growth prediction, and variogram slope estimation on an
//! equispaced circle.

use crate::covariance::{auto_method, cov_matrix, incremental_variance, JitterPolicy};
use crate::error::{Error, Result};
use crate::sampler::{sample_cholesky, FieldSample, RngSpec};
use crate::specfun::{geodesic_angle, SpherePoint};
use crate::spectrum::{AngularPowerSpectrum, SummabilityDecision};
use serde::Serialize;

/// One pair's moment comparison.
#[derive(Clone, Debug, Serialize)]
pub struct MomentPairCheck {
    /// Geodesic angle between the pair.
    pub angle: f64,
    /// Mean of Δ^{2n} over replicates.
    pub empirical: f64,
    /// (2n−1)!!·(2 c I(angle))ⁿ.
    pub predicted: f64,
    /// empirical / angle^{γn} — bounded along a sequence of shrinking angles
    /// when Σ a_m m^γ converges.
    pub distance_ratio: f64,
    /// (empirical − predicted) / standard error.
    pub z_score: f64,
}

/// Moment comparison across pairs.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: u32,
    pub gamma: f64,
    pub max_ratio: f64,
    pub pairs: Vec<MomentPairCheck>,
}

/// (2n−1)!! as a float.
fn double_factorial_odd(n: u32) -> f64 {
    (1..=n).map(|i| (2 * i - 1) as f64).product()
}

/// Simulate the field over the pairs' points and compare each pair's 2n-th
/// increment moment with the Gaussian value (2n−1)!!·(2 c I(v))ⁿ, reporting a
/// z-score from the replicate scatter and the moment-to-distance^{γn} ratio.
/// Requires Σ a_m m^γ < ∞ so the distance ratios are meaningful.
pub fn moment_bound_check(
    spec: &AngularPowerSpectrum,
    n: u32,
    gamma: f64,
    pairs: &[(SpherePoint, SpherePoint)],
    replicates: usize,
    rng: RngSpec,
) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::Domain("the moment order must be at least 1".into()));
    }
    if pairs.is_empty() {
        return Err(Error::Config("at least one pair is required".into()));
    }
    if spec.summability_check(gamma)? != SummabilityDecision::Converges {
        return Err(Error::Domain(format!(
            "the distance bound needs Σ a_m m^γ < ∞, which fails at γ = {gamma}"
        )));
    }

    // One field over the distinct points covers every pair.
    let mut points: Vec<SpherePoint> = Vec::new();
    let mut index_of = std::collections::HashMap::<Vec<u64>, usize>::new();
    let mut pair_idx = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let mut ix = [0usize; 2];
        for (slot, p) in ix.iter_mut().zip([a, b]) {
            let key: Vec<u64> = p.coords().iter().map(|c| c.to_bits()).collect();
            *slot = *index_of.entry(key).or_insert_with(|| {
                points.push(p.clone());
                points.len() - 1
            });
        }
        pair_idx.push((ix[0], ix[1]));
    }

    let cov = cov_matrix(
        spec,
        &points,
        1e-10,
        JitterPolicy::Auto {
            max_jitter: 1e-8,
        },
    )?;
    let sample = sample_cholesky(&cov, replicates, rng)?;

    let c = spec.scale();
    let df = double_factorial_odd(n);
    let r = replicates as f64;
    let mut out = Vec::with_capacity(pairs.len());
    let mut max_ratio = 0.0f64;
    for (&(ia, ib), (pa, pb)) in pair_idx.iter().zip(pairs) {
        let angle = geodesic_angle(pa, pb)?;
        let i_val = incremental_variance(spec, angle, 1e-10, auto_method(spec, 1e-10))?;
        let predicted = df * (2.0 * c * i_val).powi(n as i32);

        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for rep in 0..replicates {
            let d = sample.value(rep, ia) - sample.value(rep, ib);
            let p = d.powi(2 * n as i32);
            m1 += p;
            m2 += p * p;
        }
        m1 /= r;
        m2 /= r;
        let se = ((m2 - m1 * m1).max(0.0) / r).sqrt();
        let z_score = if se == 0.0 { 0.0 } else { (m1 - predicted) / se };
        let distance_ratio = if angle == 0.0 {
            0.0
        } else {
            m1 / angle.powf(gamma * n as f64)
        };
        max_ratio = max_ratio.max(distance_ratio);
        out.push(MomentPairCheck {
            angle,
            empirical: m1,
            predicted,
            distance_ratio,
            z_score,
        });
    }
    Ok(MomentReport {
        n,
        gamma,
        max_ratio,
        pairs: out,
    })
}

/// Variogram fit over the smallest decade of circle lags.
#[derive(Clone, Debug, Serialize)]
pub struct VariogramReport {
    /// Log-log slope of the variogram: the estimated short-range exponent.
    pub gamma_hat: f64,
    /// gamma_hat / 2.
    pub holder_bound: f64,
    /// Fitted lag angles.
    pub lags: Vec<f64>,
    /// Variogram values at those lags.
    pub values: Vec<f64>,
    pub bins_used: usize,
}

/// Estimate the short-range variogram exponent from replicates over `p`
/// equispaced circle points: V̂(ℓ) averages (X_i − X_{i+ℓ})² over replicates
/// and positions (wrapping), and an OLS line through (ln h_ℓ, ln V̂) over the
/// smallest decade of lags gives the exponent; half of it bounds the Hölder
/// order.
pub fn variogram_holder(sample: &FieldSample, bins: usize) -> Result<VariogramReport> {
    if sample.times.is_some() {
        return Err(Error::Config(
            "the variogram fit takes a purely spatial sample".into(),
        ));
    }
    if sample.replicates < 1000 {
        return Err(Error::Config(format!(
            "at least 1000 replicates are needed for a stable fit, got {}",
            sample.replicates
        )));
    }
    let p = sample.n_points;
    let nb = bins.min(10).min(p / 2);
    if nb < 4 {
        return Err(Error::Config(format!(
            "need at least 4 lag bins (point count {p} allows {nb})"
        )));
    }

    let mut lags = Vec::with_capacity(nb);
    let mut values = Vec::with_capacity(nb);
    for l in 1..=nb {
        let mut acc = 0.0;
        for rep in 0..sample.replicates {
            let row = sample.row(rep);
            for i in 0..p {
                let d = row[i] - row[(i + l) % p];
                acc += d * d;
            }
        }
        let v = acc / (sample.replicates * p) as f64;
        if v > 0.0 {
            lags.push(l as f64 * std::f64::consts::TAU / p as f64);
            values.push(v);
        }
    }
    if lags.len() < 4 {
        return Err(Error::Domain(
            "degenerate variogram: fewer than 4 bins carry positive value".into(),
        ));
    }

    // OLS slope of ln V̂ against ln h.
    let m = lags.len() as f64;
    let xs: Vec<f64> = lags.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    let gamma_hat = sxy / sxx;
    Ok(VariogramReport {
        gamma_hat,
        holder_bound: gamma_hat / 2.0,
        bins_used: lags.len(),
        lags,
        values,
    })
}
