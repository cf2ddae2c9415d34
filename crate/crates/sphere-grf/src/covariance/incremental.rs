//! Incremental variance I(v) = Σ a_n (1 − W_n^λ(cos v)) under the unit-scale
//! normalization, by two routes: direct summation with a certified remainder
//! from the analytic suffix sums, and a Jacobi-transformed series obtained by
//! partial summation that converges fast enough for heavy tails at small
//! angles.

use crate::error::{Error, Result};
use crate::specfun::{jacobi_r_stream, w_stream, GegenbauerIndex, JacobiPair};
use crate::spectrum::{AngularPowerSpectrum, TailDescriptor};

/// Hard iteration ceiling for the direct route.
const DIRECT_CAP: u64 = 500_000_000;
/// Hard iteration ceiling for the transformed route.
const STAR_CAP: u64 = 600_000_000;
/// Steps between exact re-anchorings of the approximate tail streams.
const REFRESH: u32 = 64;
/// Direct-route term budget used by [`auto_method`].
const AUTO_BUDGET: f64 = 2e7;

/// Summation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMethod {
    /// Term-by-term summation; remainder certified by the tail suffix sum.
    Direct,
    /// Partial-summation identity: I = (2 sin²(v/2)/(α+1)) ·
    /// Σ (n+α+1) A_{n+1} R_n^{(α+1,β)}(cos v). Oscillation-window stopping.
    Star,
}

/// A series estimate with its reported error bound and term count.
///
/// For [`SumMethod::Direct`] the bound is a theorem: the true value lies
/// within ±bound of `value`. For [`SumMethod::Star`] the bound is the spread
/// of the trailing window of partial sums — a convergence diagnostic, not a
/// certified remainder.
#[derive(Clone, Copy, Debug)]
pub struct SeriesEstimate {
    pub value: f64,
    pub bound: f64,
    pub terms: u64,
}

/// Compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s
    }
}

/// Streaming suffix sums A_n for n past the head, emitted in order from a
/// fixed start index. Exact closed forms where cheap (γ = 1, γ = 1/2,
/// geometric); elsewhere a multiplicative log-exact update re-anchored by a
/// full evaluation every [`REFRESH`] steps, so drift stays at rounding level.
#[derive(Clone, Debug)]
pub(crate) struct TailAStream {
    n: u64,
    kind: AKind,
}

#[derive(Clone, Debug)]
enum AKind {
    Zero,
    Recip { s: f64 },
    RootRecip { s: f64 },
    PowGen { s: f64, gamma: f64, k: f64, cur: f64, ln_n: f64, since: u32 },
    LogGen { s: f64, k: f64, cur: f64, ln_n: f64, since: u32 },
    Geo { cur: f64, r: f64 },
}

impl TailAStream {
    /// Stream starting at A_start; `start` must lie past the head.
    pub fn new(spec: &AngularPowerSpectrum, start: u64) -> TailAStream {
        debug_assert!(start > spec.head_last());
        let s = spec.tail_scale();
        let kind = if s == 0.0 {
            AKind::Zero
        } else {
            match spec.tail() {
                TailDescriptor::None => AKind::Zero,
                TailDescriptor::Power { gamma, k } => {
                    if k == 0.0 && gamma == 1.0 {
                        AKind::Recip { s }
                    } else if k == 0.0 && gamma == 0.5 {
                        AKind::RootRecip { s }
                    } else {
                        AKind::PowGen {
                            s,
                            gamma,
                            k,
                            cur: s * spec.tail().shape(start),
                            ln_n: (start as f64).ln(),
                            since: 0,
                        }
                    }
                }
                TailDescriptor::LogOnly { k } => AKind::LogGen {
                    s,
                    k,
                    cur: s * spec.tail().shape(start),
                    ln_n: (start as f64).ln(),
                    since: 0,
                },
                TailDescriptor::Geometric { r } => AKind::Geo {
                    cur: s * r.powf(start as f64),
                    r,
                },
            }
        };
        TailAStream { n: start, kind }
    }

    /// Emit A_n, then advance to n+1.
    #[inline]
    pub fn next_value(&mut self) -> f64 {
        let n = self.n;
        self.n += 1;
        match &mut self.kind {
            AKind::Zero => 0.0,
            AKind::Recip { s } => *s / n as f64,
            AKind::RootRecip { s } => *s / (n as f64).sqrt(),
            AKind::PowGen {
                s,
                gamma,
                k,
                cur,
                ln_n,
                since,
            } => {
                let v = *cur;
                *since += 1;
                if *since == REFRESH {
                    let nf = (n + 1) as f64;
                    let shape = if *k == 0.0 {
                        nf.powf(-*gamma)
                    } else {
                        nf.powf(-*gamma) * nf.ln().powf(-*k)
                    };
                    *cur = *s * shape;
                    *ln_n = nf.ln();
                    *since = 0;
                } else {
                    // ln(A_n/A_{n+1}) = γ ln(1+1/n) + k ln(1 + δ/ln n).
                    let delta = (1.0 / n as f64).ln_1p();
                    let step = *gamma * delta + *k * (delta / *ln_n).ln_1p();
                    *cur = v * (-step).exp();
                    *ln_n += delta;
                }
                v
            }
            AKind::LogGen {
                s,
                k,
                cur,
                ln_n,
                since,
            } => {
                let v = *cur;
                *since += 1;
                if *since == REFRESH {
                    let nf = (n + 1) as f64;
                    *cur = *s * nf.ln().powf(-*k);
                    *ln_n = nf.ln();
                    *since = 0;
                } else {
                    let delta = (1.0 / n as f64).ln_1p();
                    let step = *k * (delta / *ln_n).ln_1p();
                    *cur = v * (-step).exp();
                    *ln_n += delta;
                }
                v
            }
            AKind::Geo { cur, r } => {
                let v = *cur;
                *cur = v * *r;
                v
            }
        }
    }
}

/// Pick the cheaper route for a target tolerance on the unit-scale series:
/// direct summation when the suffix sums reach `tol` within a fixed term
/// budget, the transformed series otherwise. An infinite index always uses
/// the direct route (the transform needs a finite Jacobi pair).
pub fn auto_method(spec: &AngularPowerSpectrum, tol: f64) -> SumMethod {
    if matches!(spec.lambda(), GegenbauerIndex::Infinite) {
        return SumMethod::Direct;
    }
    let s = spec.tail_scale();
    if s == 0.0 || tol <= 0.0 {
        return SumMethod::Direct;
    }
    match spec.tail() {
        TailDescriptor::None | TailDescriptor::Geometric { .. } => SumMethod::Direct,
        TailDescriptor::LogOnly { .. } => SumMethod::Star,
        TailDescriptor::Power { gamma, k } => {
            // Solve s·n^{−γ}(ln n)^{−k} = tol for n by fixed point on the
            // slowly varying factor.
            let ratio = (s / tol).max(1.0);
            let mut n = ratio.powf(1.0 / gamma).max(2.0);
            for _ in 0..4 {
                let f = (ratio * n.ln().powf(-k)).max(1.0);
                n = f.powf(1.0 / gamma).max(2.0);
            }
            if n <= AUTO_BUDGET {
                SumMethod::Direct
            } else {
                SumMethod::Star
            }
        }
    }
}

/// I(v) with full diagnostics. `v` is the geodesic angle in [0, π]; `tol`
/// the target on the unit-scale value.
pub fn incremental_variance_detailed(
    spec: &AngularPowerSpectrum,
    v: f64,
    tol: f64,
    method: SumMethod,
) -> Result<SeriesEstimate> {
    spec.ensure_normalized()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(v.is_finite() && (-1e-12..=std::f64::consts::PI + 1e-12).contains(&v)) {
        return Err(Error::Domain(format!("angle must lie in [0, π], got {v}")));
    }
    let v = v.clamp(0.0, std::f64::consts::PI);
    if v == 0.0 {
        return Ok(SeriesEstimate {
            value: 0.0,
            bound: 0.0,
            terms: 0,
        });
    }
    match method {
        SumMethod::Direct => direct_series(spec, v, tol),
        SumMethod::Star => star_series(spec, v, tol),
    }
}

/// I(v) by the chosen route, value only.
pub fn incremental_variance(
    spec: &AngularPowerSpectrum,
    v: f64,
    tol: f64,
    method: SumMethod,
) -> Result<f64> {
    incremental_variance_detailed(spec, v, tol, method).map(|e| e.value)
}

fn direct_series(spec: &AngularPowerSpectrum, v: f64, tol: f64) -> Result<SeriesEstimate> {
    let x = v.cos();
    let mut w = w_stream(spec.lambda(), x)?;
    let mut sum = Kahan::default();
    for &a in spec.head() {
        let wn = w.next_value();
        sum.add(a * (1.0 - wn));
    }
    let first_tail = spec.head_last() + 1;
    let mut stream = TailAStream::new(spec, first_tail);
    let mut a_cur = stream.next_value();
    let mut terms = first_tail;
    loop {
        // Remainder past N lies in [0, 2·A_{N+1}]; report the midpoint with
        // the half-width as a certified bound.
        if a_cur <= tol {
            return Ok(SeriesEstimate {
                value: (sum.value() + a_cur).clamp(0.0, 2.0),
                bound: a_cur,
                terms,
            });
        }
        if terms - first_tail >= DIRECT_CAP {
            return Err(Error::Truncation {
                achieved: a_cur,
                tol,
                n: terms,
            });
        }
        let a_next = stream.next_value();
        let wn = w.next_value();
        sum.add((a_cur - a_next) * (1.0 - wn));
        a_cur = a_next;
        terms += 1;
    }
}

fn star_series(spec: &AngularPowerSpectrum, v: f64, tol: f64) -> Result<SeriesEstimate> {
    let lam = spec.lambda().finite_value().ok_or_else(|| {
        Error::Domain("the transformed series needs a finite index".into())
    })?;
    let alpha = lam - 0.5;
    let pair = JacobiPair::new(alpha + 1.0, alpha)?;
    let x = v.cos();
    let half = v / 2.0;
    let pref = 2.0 * half.sin() * half.sin() / (alpha + 1.0);
    let mut r = jacobi_r_stream(pair, x)?;

    // A_{n+1} source: exact suffix sums over the head, then the tail stream.
    let head = spec.head();
    let last = spec.head_last();
    let mut suffix = vec![0.0; head.len() + 1];
    for m in (0..head.len()).rev() {
        suffix[m] = suffix[m + 1] + head[m];
    }
    let tmass = spec.tail_mass();
    let mut stream = TailAStream::new(spec, last + 1);

    // Partial sums oscillate with period ~2π/v; judge convergence by the
    // spread over a trailing window of at least one full oscillation, checked
    // at window-sized intervals.
    let wd = ((2.0 * std::f64::consts::PI / v).ceil() as usize).max(16);
    let m_min = (4.0 / v).ceil() as u64 + 32;
    let tol_inner = tol / pref;
    let mut window = vec![0.0f64; wd];
    let mut sum = Kahan::default();
    let mut n: u64 = 0;
    loop {
        let m = n + 1;
        let a_np1 = if m <= last {
            suffix[m as usize] + tmass
        } else {
            stream.next_value()
        };
        let rn = r.next_value();
        sum.add((n as f64 + alpha + 1.0) * a_np1 * rn);
        window[(n % wd as u64) as usize] = sum.value();
        if n >= m_min && n % wd as u64 == 0 && n as usize >= wd {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &p in &window {
                lo = lo.min(p);
                hi = hi.max(p);
            }
            if hi - lo <= tol_inner {
                return Ok(SeriesEstimate {
                    value: (pref * 0.5 * (hi + lo)).clamp(0.0, 2.0),
                    bound: pref * (hi - lo),
                    terms: n + 1,
                });
            }
        }
        if n >= STAR_CAP {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &p in &window {
                lo = lo.min(p);
                hi = hi.max(p);
            }
            return Err(Error::Truncation {
                achieved: pref * (hi - lo),
                tol,
                n,
            });
        }
        n += 1;
    }
}
