//! Covariance evaluation: positive-definite series on the sphere, their
//! spatio-temporal extension with per-degree characteristic functions, and
//! covariance matrices over point sets with a recorded jitter policy.

mod incremental;

pub use incremental::{
    auto_method, incremental_variance, incremental_variance_detailed, SeriesEstimate,
    SumMethod,
};
pub(crate) use incremental::{Kahan, TailAStream};

use crate::error::{Error, Result};
use crate::specfun::{clamp_unit, w_stream, SpaceTimePoint, SpherePoint};
use crate::spectrum::AngularPowerSpectrum;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::HashMap;

/// Iteration ceiling for pointwise series evaluation.
const COV_CAP: u64 = 500_000_000;

/// A characteristic function of a probability law on the line: even,
/// φ(0) = 1, |φ| ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TemporalCf {
    /// exp(−b t²/2) — normal law.
    Gauss { b: f64 },
    /// exp(−b |t|) — Cauchy law.
    ExpDecay { b: f64 },
    /// 1/(1 + b t²) — Laplace law.
    Rational { b: f64 },
}

impl TemporalCf {
    pub fn validate(&self) -> Result<()> {
        let b = match *self {
            TemporalCf::Gauss { b } | TemporalCf::ExpDecay { b } | TemporalCf::Rational { b } => b,
        };
        if b.is_finite() && b > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "temporal rate must be positive, got {b}"
            )))
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TemporalCf::Gauss { b } => (-0.5 * b * t * t).exp(),
            TemporalCf::ExpDecay { b } => (-b * t.abs()).exp(),
            TemporalCf::Rational { b } => 1.0 / (1.0 + b * t * t),
        }
    }
}

/// Spatial spectrum plus per-degree temporal characteristic functions φ_n and
/// coupling constants c_n. Degrees beyond either explicit list reuse its last
/// element.
#[derive(Clone, Debug)]
pub struct SpaceTimeCovarianceModel {
    pub spectrum: AngularPowerSpectrum,
    temporal: Vec<TemporalCf>,
    c_n: Vec<f64>,
}

impl SpaceTimeCovarianceModel {
    pub fn new(
        spectrum: AngularPowerSpectrum,
        temporal: Vec<TemporalCf>,
        c_n: Vec<f64>,
    ) -> Result<Self> {
        if temporal.is_empty() {
            return Err(Error::Config("at least one temporal kind is required".into()));
        }
        for cf in &temporal {
            cf.validate()?;
        }
        let c_n = if c_n.is_empty() { vec![1.0] } else { c_n };
        // The mass condition Σ a_n c_n² < ∞ reduces to finiteness of the c_n,
        // since they are eventually constant and Σ a_n = 1.
        for (n, &c) in c_n.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Domain(format!(
                    "coupling constant c_{n} must be positive, got {c}"
                )));
            }
        }
        Ok(Self {
            spectrum,
            temporal,
            c_n,
        })
    }

    /// φ_n, with the last listed kind extending to all higher degrees.
    pub fn temporal_at(&self, n: u64) -> TemporalCf {
        let i = (n as usize).min(self.temporal.len() - 1);
        self.temporal[i]
    }

    /// c_n, with the last listed value extending to all higher degrees.
    pub fn c_at(&self, n: u64) -> f64 {
        let i = (n as usize).min(self.c_n.len() - 1);
        self.c_n[i]
    }

    pub fn temporal(&self) -> &[TemporalCf] {
        &self.temporal
    }

    pub fn c_n(&self) -> &[f64] {
        &self.c_n
    }
}

/// C(t) = c Σ a_n W_n^λ(t), truncated once the certified remainder
/// c·A_{N+1} (each |W_n| ≤ 1) is at most `tol`. C(1) = c exactly.
pub fn schoenberg_cov(spec: &AngularPowerSpectrum, t: f64, tol: f64) -> Result<f64> {
    spec.ensure_normalized()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let x = clamp_unit(t)?;
    let c = spec.scale();
    if x == 1.0 {
        return Ok(c);
    }
    let mut w = w_stream(spec.lambda(), x)?;
    let mut sum = Kahan::default();
    for &a in spec.head() {
        sum.add(a * w.next_value());
    }
    let first_tail = spec.head_last() + 1;
    let mut stream = TailAStream::new(spec, first_tail);
    let mut a_cur = stream.next_value();
    let mut n = first_tail;
    loop {
        if c * a_cur <= tol {
            return Ok(c * sum.value());
        }
        if n - first_tail >= COV_CAP {
            return Err(Error::Truncation {
                achieved: c * a_cur,
                tol,
                n,
            });
        }
        let a_next = stream.next_value();
        sum.add((a_cur - a_next) * w.next_value());
        a_cur = a_next;
        n += 1;
    }
}

/// Direction for [`i_c_convert`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvertDirection {
    CToI,
    IToC,
}

/// Exchange a covariance value C(x) and the squared increment
/// i = 2(C(1) − C(x)) of the associated isotropic field.
pub fn i_c_convert(c1: f64, value: f64, direction: ConvertDirection) -> f64 {
    match direction {
        ConvertDirection::CToI => 2.0 * (c1 - value),
        ConvertDirection::IToC => c1 - value / 2.0,
    }
}

/// Spatio-temporal covariance
/// C(cos θ, Δt) = c Σ a_n c_n² W_n^λ(cos θ) φ_n(Δt), remainder certified by
/// c · sup_{n>N} c_n² · A_{N+1} (each |W_n φ_n| ≤ 1). Reduces to
/// [`schoenberg_cov`] at Δt = 0 when all c_n = 1.
pub fn bp_cov(
    model: &SpaceTimeCovarianceModel,
    cosangle: f64,
    dt: f64,
    tol: f64,
) -> Result<f64> {
    let spec = &model.spectrum;
    spec.ensure_normalized()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !dt.is_finite() {
        return Err(Error::Domain("time lag must be finite".into()));
    }
    let x = clamp_unit(cosangle)?;
    let c = spec.scale();

    // sup of c_n² over degrees > N: suffix maximum of the explicit list (the
    // last entry extends to infinity).
    let csq: Vec<f64> = model.c_n.iter().map(|c| c * c).collect();
    let mut csq_suffix = vec![0.0; csq.len()];
    let mut running = *csq.last().unwrap();
    for i in (0..csq.len()).rev() {
        running = running.max(csq[i]);
        csq_suffix[i] = running;
    }
    let csq_sup = move |n_next: u64| -> f64 {
        let i = (n_next as usize).min(csq_suffix.len() - 1);
        csq_suffix[i]
    };

    let mut w = w_stream(spec.lambda(), x)?;
    let mut sum = Kahan::default();
    for (n, &a) in spec.head().iter().enumerate() {
        let n = n as u64;
        let term = a * csq[(n as usize).min(csq.len() - 1)]
            * w.next_value()
            * model.temporal_at(n).eval(dt);
        sum.add(term);
    }
    let first_tail = spec.head_last() + 1;
    let mut stream = TailAStream::new(spec, first_tail);
    let mut a_cur = stream.next_value();
    let mut n = first_tail;
    loop {
        if c * csq_sup(n) * a_cur <= tol {
            return Ok(c * sum.value());
        }
        if n - first_tail >= COV_CAP {
            return Err(Error::Truncation {
                achieved: c * csq_sup(n) * a_cur,
                tol,
                n,
            });
        }
        let a_next = stream.next_value();
        let term = (a_cur - a_next)
            * csq[(n as usize).min(csq.len() - 1)]
            * w.next_value()
            * model.temporal_at(n).eval(dt);
        sum.add(term);
        a_cur = a_next;
        n += 1;
    }
}

/// Diagonal regularization policy for covariance matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JitterPolicy {
    /// Assemble only; no factorization attempt, no jitter.
    None,
    /// Find the smallest jitter from a doubling schedule (starting at
    /// 1e−12 × the largest diagonal entry) that lets a Cholesky factorization
    /// succeed, capped at `max_jitter`.
    Auto { max_jitter: f64 },
}

/// A symmetric covariance matrix with the jitter that was added to make it
/// factorizable (0 when none was needed or requested).
#[derive(Clone, Debug)]
pub struct CovMatrix {
    pub matrix: DMatrix<f64>,
    pub jitter_added: f64,
}

impl CovMatrix {
    /// Wrap an externally assembled symmetric matrix, applying the jitter
    /// policy.
    pub fn from_matrix(matrix: DMatrix<f64>, policy: JitterPolicy) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariance matrix must be square and non-empty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        match policy {
            JitterPolicy::None => Ok(Self {
                matrix,
                jitter_added: 0.0,
            }),
            JitterPolicy::Auto { max_jitter } => {
                if nalgebra::Cholesky::new(matrix.clone()).is_some() {
                    return Ok(Self {
                        matrix,
                        jitter_added: 0.0,
                    });
                }
                let diag_max = (0..matrix.nrows())
                    .map(|i| matrix[(i, i)].abs())
                    .fold(0.0f64, f64::max)
                    .max(1.0);
                let mut j = 1e-12 * diag_max;
                while j <= max_jitter {
                    let mut m = matrix.clone();
                    for i in 0..m.nrows() {
                        m[(i, i)] += j;
                    }
                    if nalgebra::Cholesky::new(m.clone()).is_some() {
                        return Ok(Self {
                            matrix: m,
                            jitter_added: j,
                        });
                    }
                    j *= 2.0;
                }
                Err(Error::NotPsd(format!(
                    "factorization still fails at jitter {max_jitter}"
                )))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Lower Cholesky factor of the (possibly jittered) matrix.
    pub fn cholesky_lower(&self) -> Result<DMatrix<f64>> {
        nalgebra::Cholesky::new(self.matrix.clone())
            .map(|c| c.l())
            .ok_or_else(|| {
                Error::NotPsd("matrix is not positive definite; use an auto jitter".into())
            })
    }
}

/// One spatial covariance value at cosine `x`, routing through the direct
/// series or the transformed incremental series as [`auto_method`] decides.
fn spatial_entry(spec: &AngularPowerSpectrum, x: f64, tol: f64) -> Result<f64> {
    if x == 1.0 {
        return Ok(spec.scale());
    }
    let c = spec.scale();
    match auto_method(spec, tol / c) {
        SumMethod::Direct => schoenberg_cov(spec, x, tol),
        SumMethod::Star => {
            let est = incremental_variance_detailed(spec, x.acos(), tol / c, SumMethod::Star)?;
            Ok(c * (1.0 - est.value))
        }
    }
}

fn check_index_supports_dim(spec: &AngularPowerSpectrum, sphere_dim: usize) -> Result<()> {
    if let Some(l) = spec.lambda().finite_value() {
        if (sphere_dim as f64) > 2.0 * l + 1.0 + 1e-9 {
            return Err(Error::Domain(format!(
                "index {l} only guarantees positive definiteness up to sphere \
                 dimension {}, points live on S^{sphere_dim}",
                2.0 * l + 1.0
            )));
        }
    }
    Ok(())
}

/// Covariance matrix of a spatial model over sphere points. Entries are
/// memoized on the exact cosine value, so structured point sets (grids,
/// equispaced circles) cost one series evaluation per distinct angle;
/// distinct values are evaluated in parallel.
pub fn cov_matrix(
    spec: &AngularPowerSpectrum,
    points: &[SpherePoint],
    tol: f64,
    policy: JitterPolicy,
) -> Result<CovMatrix> {
    spec.ensure_normalized()?;
    if points.is_empty() {
        return Err(Error::Config("point list must be non-empty".into()));
    }
    let dim = points[0].sphere_dim();
    for p in points {
        if p.sphere_dim() != dim {
            return Err(Error::DimensionMismatch(
                "all points must lie on the same sphere".into(),
            ));
        }
    }
    check_index_supports_dim(spec, dim)?;

    let n = points.len();
    let mut keys: Vec<u64> = Vec::new();
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut entry_key = vec![0usize; n * (n - 1) / 2];
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = clamp_unit(points[i].inner(&points[j])?)?;
            let bits = x.to_bits();
            let slot = *seen.entry(bits).or_insert_with(|| {
                keys.push(bits);
                keys.len() - 1
            });
            entry_key[idx] = slot;
            idx += 1;
        }
    }

    let values: Vec<f64> = keys
        .par_iter()
        .map(|&bits| spatial_entry(spec, f64::from_bits(bits), tol))
        .collect::<Result<_>>()?;

    let mut m = DMatrix::<f64>::zeros(n, n);
    let c = spec.scale();
    for i in 0..n {
        m[(i, i)] = c;
    }
    idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = values[entry_key[idx]];
            m[(i, j)] = v;
            m[(j, i)] = v;
            idx += 1;
        }
    }
    CovMatrix::from_matrix(m, policy)
}

/// Covariance matrix of a spatio-temporal model over sphere×line points,
/// memoized on the (cosine, |Δt|) pair.
pub fn cov_matrix_spacetime(
    model: &SpaceTimeCovarianceModel,
    points: &[SpaceTimePoint],
    tol: f64,
    policy: JitterPolicy,
) -> Result<CovMatrix> {
    model.spectrum.ensure_normalized()?;
    if points.is_empty() {
        return Err(Error::Config("point list must be non-empty".into()));
    }
    let dim = points[0].point.sphere_dim();
    for p in points {
        if p.point.sphere_dim() != dim {
            return Err(Error::DimensionMismatch(
                "all points must lie on the same sphere".into(),
            ));
        }
        if !p.time.is_finite() {
            return Err(Error::Domain("time coordinates must be finite".into()));
        }
    }
    check_index_supports_dim(&model.spectrum, dim)?;

    let n = points.len();
    let mut keys: Vec<(u64, u64)> = Vec::new();
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut entry_key = vec![0usize; n * (n - 1) / 2];
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = clamp_unit(points[i].point.inner(&points[j].point)?)?;
            let dt = (points[i].time - points[j].time).abs();
            let key = (x.to_bits(), dt.to_bits());
            let slot = *seen.entry(key).or_insert_with(|| {
                keys.push(key);
                keys.len() - 1
            });
            entry_key[idx] = slot;
            idx += 1;
        }
    }

    let values: Vec<f64> = keys
        .par_iter()
        .map(|&(xb, tb)| bp_cov(model, f64::from_bits(xb), f64::from_bits(tb), tol))
        .collect::<Result<_>>()?;

    let mut m = DMatrix::<f64>::zeros(n, n);
    // Diagonal: same point, Δt = 0 → c Σ a_n c_n², evaluated through the
    // series so nonunit c_n are honored.
    let diag = bp_cov(model, 1.0, 0.0, tol)?;
    for i in 0..n {
        m[(i, i)] = diag;
    }
    idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = values[entry_key[idx]];
            m[(i, j)] = v;
            m[(j, i)] = v;
            idx += 1;
        }
    }
    CovMatrix::from_matrix(m, policy)
}
