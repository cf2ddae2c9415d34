//! Normalized Jacobi polynomials R_n^{(α,β)}(x) = P_n^{(α,β)}(x) / P_n^{(α,β)}(1),
//! evaluated by a forward recurrence arranged so each step performs a single
//! division by a well-separated positive quantity (no spurious 0/0 for the
//! index range α ≥ β ≥ −1/2 used here).

use super::{clamp_unit, JacobiPair};
use crate::error::Result;

/// Streaming evaluator for R_0, R_1, R_2, … at a fixed argument.
///
/// Derivation of the step: the standard three-term recurrence for P_n is
/// 2n(n+a+b)(2n+a+b−2)·P_n = (2n+a+b−1)·[(2n+a+b)(2n+a+b−2)x + a²−b²]·P_{n−1}
///                           − 2(n+a−1)(n+b−1)(2n+a+b)·P_{n−2},
/// and P_n(1) = C(n+a, n) gives P_{n−1}(1)/P_n(1) = n/(n+a) and
/// P_{n−2}(1)/P_n(1) = n(n−1)/((n+a)(n+a−1)). Dividing through by P_n(1):
/// R_n = [B·n·(n+a−1)·R_{n−1} − D·n(n−1)·R_{n−2}] / [A·(n+a)(n+a−1)]
/// with A, B, D as in the code. The divisor grows like n⁵ and stays far from
/// both zero and overflow for any n reachable in practice.
#[derive(Clone, Debug)]
pub struct JacobiRStream {
    a: f64,
    b: f64,
    x: f64,
    n_done: u64,
    r1: f64,
    r2: f64,
}

impl JacobiRStream {
    /// Next polynomial value. Never exhausts.
    pub fn next_value(&mut self) -> f64 {
        let (a, b, x) = (self.a, self.b, self.x);
        let v = match self.n_done {
            0 => 1.0,
            1 => ((a + b + 2.0) * x + (a - b)) / (2.0 * (a + 1.0)),
            _ => {
                let n = self.n_done as f64;
                let s = 2.0 * n + a + b;
                let big_a = 2.0 * n * (n + a + b) * (s - 2.0);
                let big_b = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
                let big_d = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
                let num = big_b * n * (n + a - 1.0) * self.r1
                    - big_d * n * (n - 1.0) * self.r2;
                num / (big_a * (n + a) * (n + a - 1.0))
            }
        };
        self.r2 = self.r1;
        self.r1 = v;
        self.n_done += 1;
        v
    }
}

/// Start an R_n^{(α,β)}(x) stream. Errors if |x| > 1.
pub fn jacobi_r_stream(pair: JacobiPair, x: f64) -> Result<JacobiRStream> {
    let x = clamp_unit(x)?;
    Ok(JacobiRStream {
        a: pair.alpha,
        b: pair.beta,
        x,
        n_done: 0,
        // Seeds hold (R_{n−1}, R_{n−2}) as the stream advances; the first two
        // outputs ignore them.
        r1: 1.0,
        r2: 1.0,
    })
}

/// Single value R_n^{(α,β)}(x).
pub fn jacobi_r(pair: JacobiPair, n: u64, x: f64) -> Result<f64> {
    let mut s = jacobi_r_stream(pair, x)?;
    let mut v = 0.0;
    for _ in 0..=n {
        v = s.next_value();
    }
    Ok(v)
}

/// The sequence [R_0(x), …, R_{n_max}(x)].
pub fn jacobi_r_sequence(pair: JacobiPair, x: f64, n_max: usize) -> Result<Vec<f64>> {
    let mut s = jacobi_r_stream(pair, x)?;
    Ok((0..=n_max).map(|_| s.next_value()).collect())
}
