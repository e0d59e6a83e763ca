//! Shared fixtures for the benchmarks.

use qdho_core::fock::coherent_state;
use qdho_core::{DensityMatrix, ModelParams, TruncationConfig, C64};

/// Damping with some pumping and a fast rotation.
pub fn params() -> ModelParams {
    ModelParams::new(std::f64::consts::TAU, 1.0, 0.4).expect("valid rates")
}

/// Coherent state `α = 1` on `dim ≥ 12` levels.
pub fn coherent(dim: usize) -> DensityMatrix {
    let trunc = TruncationConfig::from_dim(dim).expect("dim >= 2");
    coherent_state(C64::new(1.0, 0.0), &trunc).expect("dim large enough for alpha = 1")
}
