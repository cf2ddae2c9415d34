//! Regularity analysis of isotropic spectra: closed-form small-angle
//! constants and ratio diagnostics, path-continuity classification,
//! weighted-integrability checks, and empirical moment and variogram
//! comparisons against simulated fields.

mod dudley;
mod empirical;
mod ratios;

pub use dudley::{
    dudley_classify, integrability_check, DudleyClass, DudleyClassification, DyadicDiagnostic,
    IntegrabilityDecision, IntegrabilityReport,
};
pub use empirical::{
    moment_bound_check, variogram_holder, MomentPairCheck, MomentReport, VariogramReport,
};
pub use ratios::{
    hilbert_ratio, hilbert_sum, jacobi_difference_check, malyarenko_constant, malyarenko_ratio,
    RatioSeries,
};

use crate::covariance::{cov_matrix, JitterPolicy};
use crate::error::{Error, Result};
use crate::sampler::{sample_cholesky, RngSpec};
use crate::specfun::SpherePoint;
use crate::spectrum::{AngularPowerSpectrum, TailDescriptor};
use serde::Serialize;

/// Combined regularity verdict: analytic classification plus, when a
/// simulation backs the report, a fitted variogram exponent.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    /// Fitted variogram exponent; absent for analytic-only reports and when
    /// the estimator flags the input as degenerate.
    pub gamma_hat: Option<f64>,
    pub dudley: DudleyClass,
    pub dudley_numeric: DyadicDiagnostic,
    /// Supremum of exponents γ with Σ a_n n^γ < ∞, capped at 2.
    pub langschwab_gamma_sup: f64,
    /// Half the supremum: fields are δ-Hölder for every δ below this.
    pub holder_bound: f64,
}

fn gamma_sup(spec: &AngularPowerSpectrum) -> f64 {
    if spec.tail_mass() == 0.0 {
        return 2.0;
    }
    match spec.tail() {
        TailDescriptor::None | TailDescriptor::Geometric { .. } => 2.0,
        TailDescriptor::Power { gamma, .. } => gamma,
        TailDescriptor::LogOnly { .. } => 0.0,
    }
}

/// Analytic-only regularity report: no sampling, `gamma_hat` left absent.
pub fn regularity_report_analytic(spec: &AngularPowerSpectrum) -> Result<RegularityReport> {
    let cls = dudley_classify(spec)?;
    let sup = gamma_sup(spec);
    Ok(RegularityReport {
        gamma_hat: None,
        dudley: cls.class,
        dudley_numeric: cls.numeric,
        langschwab_gamma_sup: sup,
        holder_bound: sup / 2.0,
    })
}

/// Full regularity report: the analytic classification plus a variogram
/// exponent fitted to `replicates` fields simulated over `circle_points`
/// equispaced points of a great circle. A degenerate variogram (constant
/// field) leaves `gamma_hat` absent rather than failing.
pub fn regularity_report(
    spec: &AngularPowerSpectrum,
    circle_points: usize,
    replicates: usize,
    bins: usize,
    rng: RngSpec,
) -> Result<RegularityReport> {
    let mut report = regularity_report_analytic(spec)?;
    let points: Vec<SpherePoint> = (0..circle_points)
        .map(|k| {
            let h = k as f64 * std::f64::consts::TAU / circle_points as f64;
            SpherePoint::new(vec![h.cos(), h.sin()])
        })
        .collect::<Result<_>>()?;
    // Entry tolerance: what the direct route can certify in about a million
    // terms. Heavy tails (small γ) get a looser tolerance, which is still
    // orders of magnitude below the variogram values the slope is fitted to.
    let tol = (spec.tail_scale() * spec.tail().shape(1_000_000)).max(1e-8);
    let cov = cov_matrix(spec, &points, tol, JitterPolicy::Auto { max_jitter: 1e-8 })?;
    let sample = sample_cholesky(&cov, replicates, rng)?;
    match variogram_holder(&sample, bins) {
        Ok(v) => report.gamma_hat = Some(v.gamma_hat),
        Err(Error::Domain(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(report)
}
