//! Special functions and geometric primitives: normalized ultraspherical and
//! Jacobi polynomials, Gauss quadrature for the ultraspherical weight, real
//! spherical harmonics on S², and points on the unit sphere.

mod gegenbauer;
mod harmonics;
mod jacobi;
mod quadrature;

pub use gegenbauer::{gegenbauer_w_sequence, omega, w_stream, WStream};
pub use harmonics::{c_dim, real_sph_harm, sph_harm_count, sph_harm_index, sph_harm_table};
pub use jacobi::{jacobi_r, jacobi_r_sequence, jacobi_r_stream, JacobiRStream};
pub use quadrature::{gauss_gegenbauer, QuadratureRule};

use crate::error::{Error, Result};

/// Inner products that land outside [−1,1] by at most this much are clamped;
/// larger excursions are domain errors. Slightly looser than the unit-norm
/// tolerance on [`SpherePoint`] because norms of both factors compound.
pub(crate) const CLAMP_TOL: f64 = 1e-11;

/// Unit-norm tolerance for [`SpherePoint`] coordinates.
pub const NORM_TOL: f64 = 1e-12;

/// Clamp `t` to [−1,1], erroring if it lies outside by more than [`CLAMP_TOL`].
pub(crate) fn clamp_unit(t: f64) -> Result<f64> {
    if t.abs() <= 1.0 {
        Ok(t)
    } else if t.abs() <= 1.0 + CLAMP_TOL {
        Ok(t.clamp(-1.0, 1.0))
    } else {
        Err(Error::Domain(format!("value {t} outside [-1,1]")))
    }
}

/// The ultraspherical index λ: a positive real, or the distinguished
/// infinite value for which W_n(x) = x^n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GegenbauerIndex {
    Finite(f64),
    Infinite,
}

impl GegenbauerIndex {
    /// A finite index; must be strictly positive.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(GegenbauerIndex::Finite(value))
        } else {
            Err(Error::Domain(format!(
                "Gegenbauer index must be finite and positive, got {value}"
            )))
        }
    }

    /// The index tied to the d-sphere, λ = (d−1)/2. Requires d ≥ 2.
    pub fn from_dimension(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!(
                "sphere dimension must be at least 2, got {d}"
            )));
        }
        Ok(GegenbauerIndex::Finite((d as f64 - 1.0) / 2.0))
    }

    pub fn finite_value(self) -> Option<f64> {
        match self {
            GegenbauerIndex::Finite(v) => Some(v),
            GegenbauerIndex::Infinite => None,
        }
    }

    /// The sphere dimension d with λ = (d−1)/2, when 2λ+1 is an integer ≥ 2.
    pub fn dimension(self) -> Option<u32> {
        let v = self.finite_value()?;
        let d = 2.0 * v + 1.0;
        let rounded = d.round();
        if (d - rounded).abs() < 1e-9 && rounded >= 2.0 && rounded <= u32::MAX as f64 {
            Some(rounded as u32)
        } else {
            None
        }
    }
}

/// A Jacobi index pair (α, β), with α ≥ β ≥ −1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiPair {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || beta < -0.5 || alpha < beta {
            return Err(Error::Domain(format!(
                "Jacobi pair requires alpha >= beta >= -1/2, got ({alpha}, {beta})"
            )));
        }
        Ok(JacobiPair { alpha, beta })
    }

    /// The ultraspherical special case α = β = λ − 1/2.
    pub fn ultraspherical(lambda: f64) -> Result<Self> {
        JacobiPair::new(lambda - 0.5, lambda - 0.5)
    }
}

/// A point on the unit sphere S^d ⊂ ℝ^{d+1}, stored as its coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wrap coordinates that are already unit-norm within [`NORM_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(
                "a sphere point needs at least 2 coordinates".into(),
            ));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "coordinates have norm {norm}, expected 1 within {NORM_TOL:e}"
            )));
        }
        Ok(SpherePoint { coords })
    }

    /// Normalize arbitrary nonzero coordinates onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(
                "a sphere point needs at least 2 coordinates".into(),
            ));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(SpherePoint {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Sphere dimension d (the ambient space is ℝ^{d+1}).
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean inner product; errors on mismatched dimensions.
    pub fn inner(&self, other: &SpherePoint) -> Result<f64> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch(format!(
                "points live in R^{} and R^{}",
                self.coords.len(),
                other.coords.len()
            )));
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// cos of the geodesic distance to `other`, clamped to [−1,1].
    pub fn cos_angle(&self, other: &SpherePoint) -> Result<f64> {
        clamp_unit(self.inner(other)?)
    }
}

/// A point on sphere cross line.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub point: SpherePoint,
    pub time: f64,
}

/// Geodesic distance between two points, in radians in [0, π]: the arccos of
/// the inner product, clamped to [−1,1] first.
pub fn geodesic_angle(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    Ok(x.cos_angle(y)?.acos())
}
