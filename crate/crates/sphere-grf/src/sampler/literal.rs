//! The expansion T(x, t) = Σ_{ℓm} a_{ℓm} c_ℓ φ_ℓ(t) Y_{ℓm}(x) with a single
//! coefficient draw per replicate: in t it is a deterministic modulation, so
//! the covariance at ((x,s),(y,t)) carries the non-stationary product
//! φ_ℓ(s)φ_ℓ(t), not φ_ℓ(t−s). These routines evaluate that product-form
//! covariance and check it against simulation.

use super::kl::harmonic_matrix;
use super::{standard_normal, stream_rng, RngSpec};
use crate::covariance::SpaceTimeCovarianceModel;
use crate::error::{Error, Result};
use crate::specfun::{clamp_unit, gegenbauer_w_sequence, SpherePoint};
use crate::spectrum::degree_variances;
use rayon::prelude::*;
use serde::Serialize;

/// Product-form covariance of the modulated expansion,
/// c Σ_{ℓ≤L} a_ℓ c_ℓ² φ_ℓ(s) φ_ℓ(t) W_ℓ(⟨x,y⟩).
pub fn literal_formula_value(
    model: &SpaceTimeCovarianceModel,
    cos_xy: f64,
    s: f64,
    t: f64,
    l_max: u64,
) -> Result<f64> {
    let spec = &model.spectrum;
    spec.ensure_normalized()?;
    if !(s.is_finite() && t.is_finite()) {
        return Err(Error::Domain("times must be finite".into()));
    }
    let x = clamp_unit(cos_xy)?;
    let w = gegenbauer_w_sequence(spec.lambda(), x, l_max as usize)?;
    let mut sum = 0.0;
    for (l, &wl) in w.iter().enumerate() {
        let cf = model.temporal_at(l as u64);
        let cl = model.c_at(l as u64);
        sum += spec.coeff(l as u64) * cl * cl * cf.eval(s) * cf.eval(t) * wl;
    }
    Ok(spec.scale() * sum)
}

/// Outcome of comparing the simulated expansion against its covariance
/// formula at one space-time pair.
#[derive(Clone, Debug, Serialize)]
pub struct LiteralReport {
    pub empirical_cov: f64,
    pub formula_value: f64,
    pub se: f64,
    pub z_score: f64,
}

/// Simulate T(x,s)·T(y,t) over independent replicates (one coefficient draw
/// each) and report the z-score of the empirical mean against
/// [`literal_formula_value`]. The standard error uses the Gaussian product
/// moment Var(T_x T_y) = C_xx C_yy + C_xy².
pub fn verify_literal_expansion(
    model: &SpaceTimeCovarianceModel,
    x: &SpherePoint,
    y: &SpherePoint,
    s: f64,
    t: f64,
    l_max: u64,
    replicates: usize,
    rng: RngSpec,
) -> Result<LiteralReport> {
    let spec = &model.spectrum;
    spec.ensure_normalized()?;
    if spec.lambda().dimension() != Some(2) {
        return Err(Error::Domain(
            "harmonic sampling needs the S² index (dimension 2)".into(),
        ));
    }
    if replicates == 0 {
        return Err(Error::Config("replicates must be positive".into()));
    }
    let pts = [x.clone(), y.clone()];
    let ymat = harmonic_matrix(&pts, l_max)?;
    let v = degree_variances(spec, l_max)?;
    let nl = l_max as usize + 1;
    // Per-degree temporal weights c_ℓ φ_ℓ(·) at the two observation times.
    let mut ws = vec![0.0f64; nl];
    let mut wt = vec![0.0f64; nl];
    for l in 0..nl {
        let cf = model.temporal_at(l as u64);
        let cl = model.c_at(l as u64);
        ws[l] = cl * cf.eval(s);
        wt[l] = cl * cf.eval(t);
    }

    let total: f64 = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut tx = 0.0;
            let mut ty = 0.0;
            let mut idx = 0;
            for l in 0..nl {
                let sd = v[l].sqrt();
                let mut g = stream_rng(&rng, r as u64, l as u64);
                let mut ux = 0.0;
                let mut uy = 0.0;
                for _ in 0..(2 * l + 1) {
                    let a = sd * standard_normal(&mut g);
                    ux += a * ymat[idx * 2];
                    uy += a * ymat[idx * 2 + 1];
                    idx += 1;
                }
                tx += ws[l] * ux;
                ty += wt[l] * uy;
            }
            tx * ty
        })
        .sum();

    let empirical_cov = total / replicates as f64;
    let cos_xy = x.cos_angle(y)?;
    let formula_value = literal_formula_value(model, cos_xy, s, t, l_max)?;
    let cxx = literal_formula_value(model, 1.0, s, s, l_max)?;
    let cyy = literal_formula_value(model, 1.0, t, t, l_max)?;
    let se = ((cxx * cyy + formula_value * formula_value) / replicates as f64).sqrt();
    let z_score = if se > 0.0 {
        (empirical_cov - formula_value) / se
    } else {
        0.0
    };
    Ok(LiteralReport {
        empirical_cov,
        formula_value,
        se,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{bp_cov, schoenberg_cov, TemporalCf};
    use crate::specfun::GegenbauerIndex;
    use crate::spectrum::AngularPowerSpectrum;

    const HALF: GegenbauerIndex = GegenbauerIndex::Finite(0.5);

    fn model(head: Vec<f64>, cf: TemporalCf) -> SpaceTimeCovarianceModel {
        let spec = AngularPowerSpectrum::finite(HALF, 1.0, head).unwrap();
        SpaceTimeCovarianceModel::new(spec, vec![cf], vec![1.0]).unwrap()
    }

    #[test]
    fn zero_times_reduce_to_spatial_value() {
        let m = model(vec![0.3, 0.3, 0.4], TemporalCf::Gauss { b: 1.0 });
        let x = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        let y = SpherePoint::new(vec![0.6, 0.8, 0.0]).unwrap();
        let f = literal_formula_value(&m, 0.0, 0.0, 0.0, 2).unwrap();
        let spatial = schoenberg_cov(&m.spectrum, 0.0, 1e-14).unwrap();
        assert!((f - spatial).abs() < 1e-14, "formula {f} vs {spatial}");
        let rep =
            verify_literal_expansion(&m, &x, &y, 0.0, 0.0, 2, 40_000, RngSpec::new(11, 0))
                .unwrap();
        assert!(rep.z_score.abs() <= 3.0, "z {}", rep.z_score);
    }

    #[test]
    fn one_degree_closed_form() {
        // Head [0, 1]: the formula at x = y is φ(s)φ(t) exactly
        // (v₁·3/(4π) = c·a₁ = 1).
        let cf = TemporalCf::ExpDecay { b: 0.7 };
        let m = model(vec![0.0, 1.0], cf);
        let (s, t) = (0.4, 1.3);
        let f = literal_formula_value(&m, 1.0, s, t, 1).unwrap();
        assert!((f - cf.eval(s) * cf.eval(t)).abs() < 1e-14);
        let x = SpherePoint::new(vec![0.0, 1.0, 0.0]).unwrap();
        let rep = verify_literal_expansion(&m, &x, &x, s, t, 1, 40_000, RngSpec::new(23, 0))
            .unwrap();
        assert!((rep.formula_value - f).abs() < 1e-14);
        assert!(rep.z_score.abs() <= 3.0, "z {}", rep.z_score);
    }

    #[test]
    fn product_form_differs_from_lag_form() {
        // GAUSS kind at (s,t) = (1,2): the modulated expansion carries
        // φ(1)φ(2) = e^{-5b/2}, the stationary model φ(t−s) = e^{-b/2}.
        let b = 1.0;
        let m = model(vec![0.0, 1.0], TemporalCf::Gauss { b });
        let f = literal_formula_value(&m, 1.0, 1.0, 2.0, 1).unwrap();
        let stationary = bp_cov(&m, 1.0, 1.0, 1e-14).unwrap();
        assert!((f - f64::exp(-2.5 * b)).abs() < 1e-14, "product form {f}");
        assert!(
            (stationary - f64::exp(-0.5 * b)).abs() < 1e-14,
            "lag form {stationary}"
        );
        assert!((f - stationary).abs() > 0.4);
    }

    #[test]
    fn rejects_zero_replicates() {
        let m = model(vec![1.0], TemporalCf::Gauss { b: 1.0 });
        let x = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(verify_literal_expansion(&m, &x, &x, 0.0, 0.0, 0, 0, RngSpec::new(0, 0)).is_err());
    }
}
