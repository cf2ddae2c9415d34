//! Gauss quadrature for the normalized ultraspherical weight
//! dG_λ(x) ∝ (1−x²)^{λ−1/2} dx on [−1, 1], built by the Golub–Welsch
//! eigendecomposition of the recurrence's tridiagonal matrix.

use super::GegenbauerIndex;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a quadrature rule. Weights sum to 1 (the measure is
/// a probability measure), nodes are sorted ascending.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// ∫ f dG_λ approximated as Σ w_i f(x_i).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// An `n`-point Gauss rule for dG_λ. Exact for polynomials up to degree 2n−1.
///
/// The monic orthogonal polynomials for the (symmetric) weight have zero
/// recurrence diagonal and off-diagonal entries
/// e_k = sqrt((k+1)(k+2λ) / (4(k+λ)(k+λ+1))), k = 0, 1, …, n−2.
/// Nodes are the eigenvalues; each weight is the squared first component of
/// the corresponding normalized eigenvector.
pub fn gauss_gegenbauer(n: usize, lambda: GegenbauerIndex) -> Result<QuadratureRule> {
    let l = lambda
        .finite_value()
        .ok_or_else(|| Error::Domain("quadrature requires a finite index".into()))?;
    if n == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    if n == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n - 1 {
        let kf = k as f64;
        let e = ((kf + 1.0) * (kf + 2.0 * l) / (4.0 * (kf + l) * (kf + l + 1.0))).sqrt();
        jac[(k, k + 1)] = e;
        jac[(k + 1, k)] = e;
    }

    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Eigenvectors are orthonormal so the squared first components already sum
    // to 1; renormalize anyway to pin the measure's total mass exactly.
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    })
}
