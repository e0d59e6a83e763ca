//! Damped and amplified quantum harmonic oscillator dynamics through the
//! su(1,1) structure of its master equation.
//!
//! The analytic propagator lives in [`propagator`]; [`superop`] holds the
//! vectorized Liouvillian and the numerical reference integrators.

pub mod classical;
pub mod error;
pub mod fock;
pub mod identities;
pub mod matrix;
pub mod observables;
pub mod propagator;
pub mod su11;
pub mod superop;
pub mod tolerance;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, ModelParams, TruncationConfig};
pub use matrix::{ComplexMatrix, C64};
pub use tolerance::ToleranceConfig;
