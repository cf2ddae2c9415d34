//! Normalized ultraspherical polynomials W_n^λ (value 1 at x = 1) via a
//! single forward pass of the normalized three-term recurrence, and the
//! orthogonality weights ω_n^λ with 1/ω_n^λ = ∫ (W_n^λ)² dG_λ.

use super::{clamp_unit, GegenbauerIndex};
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Streaming evaluator for W_0^λ(x), W_1^λ(x), W_2^λ(x), …
///
/// The recurrence is carried in normalized form,
/// W_n = (2(n+λ−1)·x·W_{n−1} − (n−1)·W_{n−2}) / (n+2λ−1),
/// so no Γ-ratio normalization (which overflows for large n, λ) is ever
/// materialized. At x = ±1 the exact values (±1)^n are produced; for the
/// infinite index the sequence is x^n.
#[derive(Clone, Debug)]
pub struct WStream {
    state: State,
}

#[derive(Clone, Debug)]
enum State {
    /// x = 1: constant 1.
    Unit,
    /// x = −1: alternating ±1. `sign` is the next value.
    AltUnit { sign: f64 },
    /// λ = ∞: powers of x. `pow` is the next value.
    Power { x: f64, pow: f64 },
    /// General finite λ. Coefficient pieces are updated incrementally:
    /// at step n the next value is (an*x*w1 − bn*w2) / cn with
    /// an = 2(n+λ−1), bn = n−1, cn = n+2λ−1.
    Rec {
        x: f64,
        n_done: u64,
        w1: f64,
        w2: f64,
        an: f64,
        bn: f64,
        cn: f64,
    },
}

impl WStream {
    /// Next polynomial value. Never exhausts.
    #[inline]
    pub fn next_value(&mut self) -> f64 {
        match &mut self.state {
            State::Unit => 1.0,
            State::AltUnit { sign } => {
                let v = *sign;
                *sign = -v;
                v
            }
            State::Power { x, pow } => {
                let v = *pow;
                *pow = v * *x;
                v
            }
            State::Rec {
                x,
                n_done,
                w1,
                w2,
                an,
                bn,
                cn,
            } => {
                let v = match *n_done {
                    0 => 1.0,
                    1 => *x,
                    _ => {
                        let w = (*an * *x * *w1 - *bn * *w2) / *cn;
                        *w2 = *w1;
                        *w1 = w;
                        *an += 2.0;
                        *bn += 1.0;
                        *cn += 1.0;
                        w
                    }
                };
                *n_done += 1;
                v
            }
        }
    }
}

/// Start a W_n^λ(x) stream. Errors if |x| > 1 or a finite λ ≤ 0.
pub fn w_stream(lambda: GegenbauerIndex, x: f64) -> Result<WStream> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    let x = clamp_unit(x)?;
    let state = if x == 1.0 {
        State::Unit
    } else if x == -1.0 {
        State::AltUnit { sign: 1.0 }
    } else {
        match lambda {
            GegenbauerIndex::Infinite => State::Power { x, pow: 1.0 },
            GegenbauerIndex::Finite(l) => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::Domain(format!(
                        "Gegenbauer index must be positive, got {l}"
                    )));
                }
                // Coefficients start at n = 2: an = 2(1+λ), bn = 1, cn = 1+2λ.
                State::Rec {
                    x,
                    n_done: 0,
                    w1: x,
                    w2: 1.0,
                    an: 2.0 * (1.0 + l),
                    bn: 1.0,
                    cn: 1.0 + 2.0 * l,
                }
            }
        }
    };
    Ok(WStream { state })
}

/// The sequence [W_0^λ(x), …, W_{n_max}^λ(x)].
pub fn gegenbauer_w_sequence(
    lambda: GegenbauerIndex,
    x: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    let mut s = w_stream(lambda, x)?;
    Ok((0..=n_max).map(|_| s.next_value()).collect())
}

/// The orthogonality weight ω_n^λ = ((n+λ)/λ)·Γ(n+2λ)/(Γ(2λ)·n!), so that
/// ∫ (W_n^λ)² dG_λ = 1/ω_n^λ. Requires a finite index.
pub fn omega(n: u64, lambda: GegenbauerIndex) -> Result<f64> {
    let l = lambda
        .finite_value()
        .ok_or_else(|| Error::Domain("omega requires a finite index".into()))?;
    if n == 0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let log_ratio = ln_gamma(nf + 2.0 * l) - ln_gamma(2.0 * l) - ln_gamma(nf + 1.0);
    Ok((nf + l) / l * log_ratio.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: GegenbauerIndex = GegenbauerIndex::Finite(0.5);

    #[test]
    fn w0_is_one() {
        let seq = gegenbauer_w_sequence(GegenbauerIndex::Finite(2.3), 0.73, 0).unwrap();
        assert_eq!(seq, vec![1.0]);
    }

    #[test]
    fn legendre_closed_forms() {
        // W^{1/2} are the Legendre polynomials: P_1 = x, P_2 = (3x²−1)/2.
        let seq = gegenbauer_w_sequence(HALF, 0.5, 2).unwrap();
        assert_eq!(seq[0], 1.0);
        assert_eq!(seq[1], 0.5);
        assert!((seq[2] - (-0.125)).abs() < 1e-15);
    }

    #[test]
    fn infinite_index_powers() {
        let seq = gegenbauer_w_sequence(GegenbauerIndex::Infinite, 0.5, 3).unwrap();
        assert_eq!(seq, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn exact_at_unit_arguments() {
        for lambda in [HALF, GegenbauerIndex::Finite(3.0), GegenbauerIndex::Infinite] {
            let at1 = gegenbauer_w_sequence(lambda, 1.0, 40).unwrap();
            assert!(at1.iter().all(|&w| w == 1.0));
            let atm1 = gegenbauer_w_sequence(lambda, -1.0, 7).unwrap();
            for (n, &w) in atm1.iter().enumerate() {
                assert_eq!(w, if n % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(w_stream(HALF, 1.1).is_err());
        assert!(w_stream(HALF, f64::NAN).is_err());
    }

    #[test]
    fn omega_legendre_is_2n_plus_1() {
        // ω_n^{1/2} = 2n+1 from Legendre orthogonality under dx/2.
        for n in 0..12u64 {
            let w = omega(n, HALF).unwrap();
            assert!(
                (w - (2 * n + 1) as f64).abs() < 1e-10,
                "omega({n}) = {w}"
            );
        }
        assert!((omega(5, HALF).unwrap() - 11.0).abs() < 1e-10);
    }

    #[test]
    fn omega_small_cases() {
        assert_eq!(omega(0, GegenbauerIndex::Finite(4.2)).unwrap(), 1.0);
        // ω_1^λ = ((1+λ)/λ)·2λ = 2(1+λ); at λ = 3/2 that is 5.
        assert!((omega(1, GegenbauerIndex::Finite(1.5)).unwrap() - 5.0).abs() < 1e-12);
        assert!(omega(3, GegenbauerIndex::Infinite).is_err());
    }
}
