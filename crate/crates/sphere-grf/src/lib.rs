//! Isotropic Gaussian random fields on the d-sphere and on sphere cross line.
//!
//! The crate is organized around the Schoenberg expansion of an isotropic
//! covariance: a mixing law over normalized ultraspherical polynomials,
//! optionally modulated per degree by temporal characteristic functions for
//! the sphere-cross-line case.
//!
//! - [`specfun`] — normalized Gegenbauer/Jacobi polynomials, real spherical
//!   harmonics on S², Gauss quadrature for the ultraspherical weight, and
//!   geometric primitives.
//! - [`spectrum`] — angular power spectra: explicit coefficient heads with
//!   analytic tail descriptors, normalization, degree-variance conversion,
//!   summability decisions, and the spectral fractional Laplacian.
//! - [`covariance`] — series covariances and incremental variances with
//!   certified truncation, spatio-temporal covariances, covariance matrices.
//! - [`sampler`] — Karhunen–Loève, Cholesky, and spatio-temporal samplers
//!   with a splittable deterministic RNG contract.
//! - [`analysis`] — small-angle asymptotics of the incremental variance,
//!   path-continuity classification, summability/integrability/moment
//!   checks, and variogram-based Hölder estimation.
//! - [`io`] — model documents (JSON, schema `aps-v1`), CSV emitters, atomic
//!   file writes.

pub mod analysis;
pub mod covariance;
pub mod error;
pub mod io;
pub mod sampler;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
