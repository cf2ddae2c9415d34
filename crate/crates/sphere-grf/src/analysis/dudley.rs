//! Path-continuity classification through the dyadic entropy integral
//! Σ_j ∫_{2^{−j−1}}^{2^{−j}} √(Ī(u)/(−ln u))·du/u, and the weighted
//! integrability check ∫₀^{π/2} I(u)·u^{−γ−1} du on the incremental variance.
//!
//! The analytic tail descriptor is authoritative for both decisions; the
//! dyadic numerics are diagnostics. Shallow octaves integrate certified
//! series evaluations of I; octaves far beyond floating-point range use the
//! descriptor's asymptote in log space, where a ratio test on consecutive
//! octave sums settles convergence.

use super::ratios::malyarenko_constant;
use crate::covariance::{auto_method, incremental_variance_detailed};
use crate::error::{Error, Result};
use crate::specfun::GegenbauerIndex;
use crate::spectrum::{AngularPowerSpectrum, SummabilityDecision, TailDescriptor};
use serde::ser::Serializer;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, LN_2};

/// Octave-sum ratio below which the dyadic tail is declared convergent.
const RATIO_TOL: f64 = 0.999;
/// Deep octave window for the asymptotic ratio test.
const DEEP_LO: u32 = 1490;
const DEEP_HI: u32 = 1500;
/// Octaves evaluated by certified series summation (u down to 2^{−15}).
const SHALLOW_OCTAVES: u32 = 14;
/// Simpson intervals per octave (even).
const SIMPSON: usize = 8;
/// Deepest octave included in the continuation value.
const VALUE_OCTAVES: u32 = 1500;

/// Path-continuity verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DudleyClass {
    Continuous,
    Discontinuous,
    /// Reserved for inputs the classifier cannot settle; the descriptor
    /// family implemented here decides every case.
    Indeterminate,
}

/// Numeric side of the classification: the truncated entropy integral when
/// the dyadic sums converge, or a marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DyadicDiagnostic {
    Value(f64),
    Divergent,
    /// The entropy argument needs a finite-dimensional sphere.
    NotApplicable,
}

impl Serialize for DyadicDiagnostic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DyadicDiagnostic::Value(v) => s.serialize_f64(*v),
            DyadicDiagnostic::Divergent => s.serialize_str("DIVERGENT"),
            DyadicDiagnostic::NotApplicable => s.serialize_str("NOT_APPLICABLE"),
        }
    }
}

/// Analytic verdict plus the dyadic diagnostic and whether they agree.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DudleyClassification {
    pub class: DudleyClass,
    pub numeric: DyadicDiagnostic,
    pub agreement: bool,
}

/// True when all variance sits in degree 0, so I ≡ 0.
fn zero_variation(spec: &AngularPowerSpectrum) -> bool {
    spec.tail_mass() == 0.0 && spec.head().iter().skip(1).all(|&a| a == 0.0)
}

/// Tail descriptor with a zero-scale tail demoted to finite support.
fn effective_tail(spec: &AngularPowerSpectrum) -> TailDescriptor {
    if spec.tail_mass() == 0.0 {
        TailDescriptor::None
    } else {
        spec.tail()
    }
}

/// c₂ = Σ a_n·n(n+2λ)/(2(2λ+1)) (n/2 per term at λ = ∞): the exact v²
/// coefficient of I(v) when the second spectral moment is summable.
fn curvature_constant(spec: &AngularPowerSpectrum) -> Result<f64> {
    let factor = |n: f64| -> f64 {
        match spec.lambda() {
            GegenbauerIndex::Finite(l) => n * (n + 2.0 * l) / (2.0 * (2.0 * l + 1.0)),
            GegenbauerIndex::Infinite => 0.5 * n,
        }
    };
    let mut c2 = 0.0;
    for (n, &a) in spec.head().iter().enumerate() {
        c2 += a * factor(n as f64);
    }
    match effective_tail(spec) {
        TailDescriptor::None => {}
        TailDescriptor::Geometric { r } => {
            // a_n = s(1−r)rⁿ beyond the head: closed geometric moment sums
            // Σ_{n≥m} n qⁿ and Σ_{n≥m} n(n−1) qⁿ.
            let s = spec.tail_scale();
            let m = (spec.head_last() + 1) as f64;
            let q = r;
            let om = 1.0 - q;
            let qm = q.powf(m);
            let t1 = qm * (m * om + q) / (om * om);
            let t_fall = m * (m - 1.0) * qm / om
                + 2.0 * m * qm * q / (om * om)
                + 2.0 * qm * q * q / (om * om * om);
            let t2 = t_fall + t1;
            c2 += match spec.lambda() {
                GegenbauerIndex::Finite(l) => {
                    s * om * (t2 + 2.0 * l * t1) / (2.0 * (2.0 * l + 1.0))
                }
                GegenbauerIndex::Infinite => 0.5 * s * om * t1,
            };
        }
        _ => {
            return Err(Error::Config(
                "the second spectral moment diverges for this tail".into(),
            ));
        }
    }
    Ok(c2)
}

/// Descriptor asymptote of ln I as a function of w = −ln u, valid deep past
/// floating-point range of u.
enum Asym {
    Power { ln_ks: f64, gamma: f64, k: f64 },
    Log { ln_s: f64, k: f64 },
    Smooth { ln_c2: f64 },
}

impl Asym {
    fn of(spec: &AngularPowerSpectrum) -> Result<Asym> {
        match effective_tail(spec) {
            TailDescriptor::Power { gamma, k } => {
                let kc = malyarenko_constant(spec.lambda(), gamma)?;
                Ok(Asym::Power {
                    ln_ks: (kc * spec.tail_scale()).ln(),
                    gamma,
                    k,
                })
            }
            TailDescriptor::LogOnly { k } => Ok(Asym::Log {
                ln_s: spec.tail_scale().ln(),
                k,
            }),
            TailDescriptor::None | TailDescriptor::Geometric { .. } => Ok(Asym::Smooth {
                ln_c2: curvature_constant(spec)?.ln(),
            }),
        }
    }

    fn ln_i(&self, w: f64) -> f64 {
        match *self {
            Asym::Power { ln_ks, gamma, k } => ln_ks - gamma * w - k * w.ln(),
            Asym::Log { ln_s, k } => ln_s - k * w.ln(),
            Asym::Smooth { ln_c2 } => ln_c2 - 2.0 * w,
        }
    }
}

/// ln ∫_{w_lo}^{w_hi} exp(f(w)) dw by Simpson's rule combined in log space.
fn ln_simpson(w_lo: f64, w_hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (w_hi - w_lo) / SIMPSON as f64;
    let mut terms = [0.0f64; SIMPSON + 1];
    for (i, t) in terms.iter_mut().enumerate() {
        let coeff: f64 = if i == 0 || i == SIMPSON {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        *t = f(w_lo + i as f64 * h) + (coeff * h / 3.0).ln();
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// I(u) with the truncation bound certified to at most `rel` of the value,
/// found by shrinking the absolute tolerance.
fn eval_rel(spec: &AngularPowerSpectrum, u: f64, rel: f64) -> Result<f64> {
    let mut tol = 1e-3;
    let mut last = (0.0, f64::INFINITY);
    for _ in 0..64 {
        let method = auto_method(spec, tol);
        let e = incremental_variance_detailed(spec, u, tol, method)?;
        if e.bound <= rel * e.value || (e.value == 0.0 && e.bound == 0.0) {
            return Ok(e.value);
        }
        last = (e.value, e.bound);
        tol = (rel * e.value).min(0.5 * tol).max(1e-300);
    }
    Err(Error::Truncation {
        achieved: last.1,
        tol: rel * last.0,
        n: 0,
    })
}

/// Entropy-integral octaves u ∈ [2^{−j−1}, 2^{−j}] for j = 1..=SHALLOW via
/// certified series values of I, with the running supremum Ī accumulated
/// along the grid (smallest u first).
fn dudley_shallow(spec: &AngularPowerSpectrum) -> Result<f64> {
    let mut total = 0.0;
    let mut envelope = 0.0f64;
    for j in (1..=SHALLOW_OCTAVES).rev() {
        let a = 2f64.powi(-(j as i32) - 1);
        let h = a / SIMPSON as f64;
        let mut acc = 0.0;
        for i in 0..=SIMPSON {
            let u = a + i as f64 * h;
            envelope = envelope.max(eval_rel(spec, u, 0.01)?);
            let f = (envelope / -u.ln()).sqrt() / u;
            let coeff: f64 = if i == 0 || i == SIMPSON {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += coeff * f;
        }
        total += acc * h / 3.0;
    }
    Ok(total)
}

/// Classify path continuity from the tail descriptor, and run the dyadic
/// diagnostic: octave sums of the entropy integral, declared convergent when
/// the deep octave ratios all fall below 0.999.
pub fn dudley_classify(spec: &AngularPowerSpectrum) -> Result<DudleyClassification> {
    spec.ensure_normalized()?;
    if zero_variation(spec) {
        return Ok(DudleyClassification {
            class: DudleyClass::Continuous,
            numeric: DyadicDiagnostic::Value(0.0),
            agreement: true,
        });
    }
    if spec.lambda().finite_value().is_none() {
        // Uncountably many orthonormal directions at a fixed positive
        // separation: no continuous version, and no polynomial entropy bound.
        return Ok(DudleyClassification {
            class: DudleyClass::Discontinuous,
            numeric: DyadicDiagnostic::NotApplicable,
            agreement: true,
        });
    }
    let class = match effective_tail(spec) {
        TailDescriptor::None | TailDescriptor::Geometric { .. } | TailDescriptor::Power { .. } => {
            DudleyClass::Continuous
        }
        TailDescriptor::LogOnly { k } => {
            if k > 1.0 {
                DudleyClass::Continuous
            } else {
                DudleyClass::Discontinuous
            }
        }
    };

    let asym = Asym::of(spec)?;
    let entropy = |w: f64| 0.5 * (asym.ln_i(w) - w.ln());
    let deep: Vec<f64> = (DEEP_LO..=DEEP_HI)
        .map(|j| ln_simpson(j as f64 * LN_2, (j + 1) as f64 * LN_2, entropy))
        .collect();
    let converges = deep.windows(2).all(|p| (p[1] - p[0]).exp() < RATIO_TOL);

    let numeric = if converges {
        let mut total = dudley_shallow(spec)?;
        for j in (SHALLOW_OCTAVES + 1)..=VALUE_OCTAVES {
            total += ln_simpson(j as f64 * LN_2, (j + 1) as f64 * LN_2, entropy).exp();
        }
        DyadicDiagnostic::Value(total)
    } else {
        DyadicDiagnostic::Divergent
    };
    Ok(DudleyClassification {
        class,
        numeric,
        agreement: converges == (class == DudleyClass::Continuous),
    })
}

/// Verdict on ∫₀^{π/2} I(u)·u^{−γ−1} du.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntegrabilityDecision {
    Finite,
    Divergent,
}

/// Decision (from the coefficient summability criterion), the truncated
/// integral, and whether the dyadic numerics corroborate the decision.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegrabilityReport {
    pub decision: IntegrabilityDecision,
    pub value: f64,
    pub numeric_agrees: bool,
}

/// Integrability of the γ-weighted incremental variance. The analytic
/// decision is Σ a_n n^γ < ∞; numerically, octave sums of the integral are
/// ratio-tested on the asymptote and the vanishing of I(u)/u^γ is checked
/// along the deep grid. The value is the truncated integral: certified
/// series octaves down to u ≈ 5e−5, extended by the asymptote continuation
/// when the decision is FINITE.
pub fn integrability_check(spec: &AngularPowerSpectrum, gamma: f64) -> Result<IntegrabilityReport> {
    spec.ensure_normalized()?;
    if !(gamma.is_finite() && gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain(format!(
            "weight exponent must lie in (0, 2), got {gamma}"
        )));
    }
    let decision = match spec.summability_check(gamma)? {
        SummabilityDecision::Converges => IntegrabilityDecision::Finite,
        _ => IntegrabilityDecision::Divergent,
    };
    if zero_variation(spec) {
        return Ok(IntegrabilityReport {
            decision,
            value: 0.0,
            numeric_agrees: true,
        });
    }

    // Shallow octaves u ∈ (π/2)·[2^{−j−1}, 2^{−j}], j = 0..=SHALLOW.
    let mut value = 0.0;
    for j in 0..=SHALLOW_OCTAVES {
        let a = FRAC_PI_2 * 2f64.powi(-(j as i32) - 1);
        let h = a / SIMPSON as f64;
        let mut acc = 0.0;
        for i in 0..=SIMPSON {
            let u = a + i as f64 * h;
            let f = eval_rel(spec, u, 0.01)? * u.powf(-gamma - 1.0);
            let coeff: f64 = if i == 0 || i == SIMPSON {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += coeff * f;
        }
        value += acc * h / 3.0;
    }

    // The u-octaves are (π/2)-scaled, so the asymptote is read at the shifted
    // log arguments w = ln(1/u) = base + j·ln 2.
    let asym = Asym::of(spec)?;
    let base = (2.0 / std::f64::consts::PI).ln();
    let integrand = |w: f64| asym.ln_i(w) + gamma * w;
    let deep: Vec<f64> = (DEEP_LO..=DEEP_HI)
        .map(|j| ln_simpson(base + j as f64 * LN_2, base + (j + 1) as f64 * LN_2, integrand))
        .collect();
    let converges = deep.windows(2).all(|p| (p[1] - p[0]).exp() < RATIO_TOL);
    let vanishes = {
        let w_lo = base + DEEP_LO as f64 * LN_2;
        let w_hi = base + DEEP_HI as f64 * LN_2;
        integrand(w_hi) < integrand(w_lo)
    };
    if decision == IntegrabilityDecision::Finite && converges {
        for j in (SHALLOW_OCTAVES + 1)..=VALUE_OCTAVES {
            value += ln_simpson(
                base + j as f64 * LN_2,
                base + (j + 1) as f64 * LN_2,
                integrand,
            )
            .exp();
        }
    }
    let numeric_agrees = (converges && vanishes) == (decision == IntegrabilityDecision::Finite);

    Ok(IntegrabilityReport {
        decision,
        value,
        numeric_agrees,
    })
}
