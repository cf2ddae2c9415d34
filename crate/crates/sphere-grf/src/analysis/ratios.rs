//! Small-angle asymptotics of the incremental variance: predicted constants,
//! measured-to-predicted ratio series for the zonal and power-series routes,
//! and the difference identity behind the transformed series evaluation.

use crate::covariance::{incremental_variance_detailed, SeriesEstimate, SumMethod};
use crate::error::{Error, Result};
use crate::specfun::{jacobi_r, GegenbauerIndex, JacobiPair};
use crate::spectrum::{AngularPowerSpectrum, TailDescriptor};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// Iteration cap for the truncated power-series evaluation.
const HILBERT_CAP: u64 = 600_000_000;
/// Running powers of cos v are re-anchored with an exact exp this often.
const POW_REFRESH: u64 = 4096;

/// Measured-to-predicted ratios along a decreasing grid of angles.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSeries {
    pub v: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl RatioSeries {
    fn new(v: Vec<f64>, ratios: Vec<f64>) -> Result<Self> {
        if v.len() != ratios.len() {
            return Err(Error::DimensionMismatch(
                "angle grid and ratio list must have equal length".into(),
            ));
        }
        for w in v.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Config("angles must be strictly decreasing".into()));
            }
        }
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Domain("angles must be positive".into()));
        }
        Ok(Self { v, ratios })
    }
}

fn validate_grid(v_grid: &[f64]) -> Result<()> {
    if v_grid.is_empty() {
        return Err(Error::Config("angle grid must be non-empty".into()));
    }
    for &v in v_grid {
        if !(v.is_finite() && v > 0.0 && v <= 0.1) {
            return Err(Error::Domain(format!("angles must lie in (0, 0.1], got {v}")));
        }
    }
    for w in v_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config("angles must be strictly decreasing".into()));
        }
    }
    Ok(())
}

/// K(λ, γ) = Γ(λ+1/2)·Γ(1−γ/2) / (2^γ·Γ(λ+1/2+γ/2)), the constant in the
/// small-angle law I(v) ~ K·v^γ·ℓ(1/v) for tail sums A_n ~ n^{−γ}·ℓ(n).
/// Evaluated in log space; relative error ≤ 1e−12 away from the γ = 2 pole.
pub fn malyarenko_constant(lambda: GegenbauerIndex, gamma: f64) -> Result<f64> {
    let lam = lambda
        .finite_value()
        .ok_or_else(|| Error::Domain("the asymptote constant needs a finite index".into()))?;
    if !(lam.is_finite() && lam > 0.0) {
        return Err(Error::Domain(format!("index must be positive, got {lam}")));
    }
    if !(gamma.is_finite() && gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain(format!(
            "tail-sum exponent must lie in (0, 2), got {gamma}"
        )));
    }
    if 1.0 - gamma / 2.0 < 1e-8 {
        return Err(Error::Domain(format!(
            "exponent {gamma} is too close to the gamma-function pole at 2"
        )));
    }
    let ln_k = ln_gamma(lam + 0.5) + ln_gamma(1.0 - gamma / 2.0)
        - gamma * std::f64::consts::LN_2
        - ln_gamma(lam + 0.5 + gamma / 2.0);
    Ok(ln_k.exp())
}

/// Measured I(v) against the predicted asymptote K·s·v^γ·(ln(1/v))^{−k} on a
/// decreasing angle grid. Each evaluation truncates the direct series once
/// the certified remainder is at most 1% of the prediction.
pub fn malyarenko_ratio(spec: &AngularPowerSpectrum, v_grid: &[f64]) -> Result<RatioSeries> {
    spec.ensure_normalized()?;
    let TailDescriptor::Power { gamma, k } = spec.tail() else {
        return Err(Error::Config(
            "the asymptote ratio needs a power-law tail descriptor".into(),
        ));
    };
    let s = spec.tail_scale();
    if s == 0.0 {
        return Err(Error::Config(
            "the asymptote ratio needs a nonzero tail".into(),
        ));
    }
    validate_grid(v_grid)?;
    let kconst = malyarenko_constant(spec.lambda(), gamma)?;
    let ratios: Vec<f64> = v_grid
        .par_iter()
        .map(|&v| {
            let slow = v.recip().ln().powf(-k);
            let predicted = kconst * s * v.powf(gamma) * slow;
            let est =
                incremental_variance_detailed(spec, v, 0.01 * predicted, SumMethod::Direct)?;
            Ok(est.value / predicted)
        })
        .collect::<Result<_>>()?;
    RatioSeries::new(v_grid.to_vec(), ratios)
}

/// 1 − Σ a_n (cos v)^n for v ∈ (0, π/2]. The head uses expm1 for full
/// precision near v = 0; the tail is truncated once the geometric remainder
/// x^{N+1}·A_{N+1} falls below 1e−16 of the running value, and that remainder
/// is the reported bound.
pub fn hilbert_sum(spec: &AngularPowerSpectrum, v: f64) -> Result<SeriesEstimate> {
    spec.ensure_normalized()?;
    if !(v.is_finite() && v > 0.0 && v <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("angle must lie in (0, π/2], got {v}")));
    }
    let half_sin = (0.5 * v).sin();
    // ln cos v through ln(1+(cos v − 1)), exact for small angles.
    let ln_x = (-2.0 * half_sin * half_sin).ln_1p();
    let x = v.cos();

    // Head: Σ a_n (1 − x^n) term by term.
    let mut value = 0.0;
    for (n, &a) in spec.head().iter().enumerate() {
        value += a * -f64::exp_m1(n as f64 * ln_x);
    }
    if spec.tail_mass() == 0.0 {
        return Ok(SeriesEstimate {
            value,
            bound: 0.0,
            terms: spec.head_last(),
        });
    }

    // Tail: A_{L+1} − Σ_{n>L} a_n x^n, with a running power of x.
    let first = spec.head_last() + 1;
    let mut stream = crate::covariance::TailAStream::new(spec, first);
    let mut a_cur = stream.next_value();
    value += a_cur;
    let mut n = first;
    let mut xp = (n as f64 * ln_x).exp();
    let mut tail_series = 0.0;
    loop {
        let a_next = stream.next_value();
        tail_series += (a_cur - a_next) * xp;
        let bound = xp * x * a_next;
        let target = (value - tail_series).abs().max(f64::MIN_POSITIVE);
        if bound <= 1e-16 * target {
            return Ok(SeriesEstimate {
                value: (value - tail_series).max(0.0),
                bound,
                terms: n,
            });
        }
        if n - first >= HILBERT_CAP {
            return Err(Error::Truncation {
                achieved: bound,
                tol: 1e-16 * target,
                n,
            });
        }
        a_cur = a_next;
        n += 1;
        if (n - first) % POW_REFRESH == 0 {
            xp = (n as f64 * ln_x).exp();
        } else {
            xp *= x;
        }
    }
}

/// Measured 1 − Σ a_n (cos v)^n against the predicted power-series asymptote
/// s·Γ(1−γ)·2^{−γ}·v^{2γ}·(2 ln(1/v))^{−k} for tails A_n ~ s·n^{−γ}(ln n)^{−k}
/// with γ ∈ (0, 1). The zonal weight plays no role here: the evaluator is the
/// x^n (infinite-index) form.
pub fn hilbert_ratio(spec: &AngularPowerSpectrum, v_grid: &[f64]) -> Result<RatioSeries> {
    spec.ensure_normalized()?;
    let TailDescriptor::Power { gamma, k } = spec.tail() else {
        return Err(Error::Config(
            "the power-series ratio needs a power-law tail descriptor".into(),
        ));
    };
    if !(gamma < 1.0) {
        return Err(Error::Domain(format!(
            "the power-series asymptote needs a tail exponent in (0, 1), got {gamma}"
        )));
    }
    let s = spec.tail_scale();
    if s == 0.0 {
        return Err(Error::Config(
            "the power-series ratio needs a nonzero tail".into(),
        ));
    }
    validate_grid(v_grid)?;
    let ln_const = ln_gamma(1.0 - gamma) - gamma * std::f64::consts::LN_2;
    let cconst = s * ln_const.exp();
    let ratios: Vec<f64> = v_grid
        .par_iter()
        .map(|&v| {
            let slow = (2.0 * v.recip().ln()).powf(-k);
            let predicted = cconst * v.powf(2.0 * gamma) * slow;
            Ok(hilbert_sum(spec, v)?.value / predicted)
        })
        .collect::<Result<_>>()?;
    RatioSeries::new(v_grid.to_vec(), ratios)
}

/// Residual |R_n^{α,β} − R_{n+1}^{α,β} − ((2n+α+β+2)/(α+1))·sin²(θ/2)·R_n^{α+1,β}|
/// at x = cos θ: the two sides are evaluated independently and compared.
pub fn jacobi_difference_check(n: u64, jp: JacobiPair, theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("angle must be finite, got {theta}")));
    }
    let x = theta.cos();
    let lhs = jacobi_r(jp, n, x)? - jacobi_r(jp, n + 1, x)?;
    let lifted = JacobiPair::new(jp.alpha + 1.0, jp.beta)?;
    let half_sin = (0.5 * theta).sin();
    let coeff = (2.0 * n as f64 + jp.alpha + jp.beta + 2.0) / (jp.alpha + 1.0);
    let rhs = coeff * half_sin * half_sin * jacobi_r(lifted, n, x)?;
    Ok((lhs - rhs).abs())
}
