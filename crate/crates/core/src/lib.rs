//! Fractional space-time noise driving a heat equation.
//!
//! The crate builds spectrally truncated fractional sheets and their mixed
//! derivative, splits the heat kernel into parabolic dyadic pieces, computes
//! the divergent renormalisation constants of the kernel-driven Levy area,
//! and solves the resulting (renormalised) rough heat equation.
//!
//! Points of space-time are `(t, x)` pairs; time comes first everywhere.

pub mod besov;
mod error;
mod linalg;
pub mod heat_kernel;
pub mod parabolic;
pub mod quadrature;
pub mod rough_model;
pub mod solver;
pub mod spectral_field;
pub mod stats;

#[cfg(feature = "harness")]
pub mod harness;

pub use error::{Error, Result};
