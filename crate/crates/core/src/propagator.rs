//! Closed-form evolution of the damped oscillator density matrix.
//!
//! With the disentangling coefficients `E, F, G` of [`crate::su11`],
//!
//! ```text
//! ρ(t) = e^{(μ−ν)t/2}/F · Σₙ Gⁿ/n! (a†)ⁿ [ e^{(−iωt − ln F)N}
//!          { Σₘ Eᵐ/m! aᵐ ρ(0) (a†)ᵐ } e^{(iωt − ln F)N} ] aⁿ
//! ```
//!
//! On a truncated space `a` and `a†` are nilpotent, so both sums stop at
//! index `D − 1` and the series is evaluated exactly. The lowering sum never
//! leaves the truncated space and the raising sum only drops what it pushes
//! past the top level, so the result is the projection of the exact
//! infinite-dimensional solution.

use log::warn;

use crate::error::{Error, Result};
use crate::fock::{build_operators, DensityMatrix, ModelParams, TruncationConfig};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::su11::{efg_with, DisentanglingCoefficients, DEGENERACY_THRESHOLD};

/// Input states may deviate this much from unit trace (evolved states leak
/// a little through the truncation edge).
pub const INPUT_TRACE_TOL: f64 = 1e-6;
/// Input states may deviate this much from Hermitian.
pub const INPUT_HERMITICITY_TOL: f64 = 1e-10;
/// Acceptance threshold of the doubling-D truncation check.
pub const TRUNCATION_CHECK_TOL: f64 = 1e-9;

/// Everything needed to apply the propagator at one time.
#[derive(Debug, Clone)]
pub struct PropagatorPlan {
    pub coeffs: DisentanglingCoefficients,
    pub params: ModelParams,
    pub trunc: TruncationConfig,
    /// `e^{(μ−ν)t/2} / F(t)`.
    pub prefactor: f64,
    /// Highest index used in either series.
    pub max_series_index: usize,
}

impl PropagatorPlan {
    pub fn new(params: &ModelParams, trunc: &TruncationConfig, t: f64) -> Result<Self> {
        Self::with_threshold(params, trunc, t, DEGENERACY_THRESHOLD)
    }

    pub fn with_threshold(
        params: &ModelParams,
        trunc: &TruncationConfig,
        t: f64,
        degeneracy_threshold: f64,
    ) -> Result<Self> {
        params.validate()?;
        let coeffs = efg_with(params.mu, params.nu, t, degeneracy_threshold)?;
        if params.is_gain_dominant() && t > 0.0 {
            warn!(
                "gain-dominant regime (nu = {} > mu = {}): no steady state, truncation error grows with t",
                params.nu, params.mu
            );
        }
        Ok(Self {
            prefactor: coeffs.prefactor(),
            coeffs,
            params: *params,
            trunc: *trunc,
            max_series_index: trunc.dim() - 1,
        })
    }

    pub fn t(&self) -> f64 {
        self.coeffs.t
    }

    pub fn apply(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        if rho0.trunc().dim() != self.trunc.dim() {
            return Err(Error::DimensionMismatch(format!(
                "plan for dimension {} applied to a state of dimension {}",
                self.trunc.dim(),
                rho0.dim()
            )));
        }
        check_input(rho0)?;
        if self.t() == 0.0 {
            return Ok(rho0.clone());
        }
        let d = self.trunc.dim();
        let ops = build_operators(&self.trunc, self.params.theta);
        let DisentanglingCoefficients { e_coef, f_coef, g_coef, .. } = self.coeffs;
        let ln_f = f_coef.ln();
        let omega_t = self.params.omega * self.t();

        // Σₘ Eᵐ/m! aᵐ ρ (a†)ᵐ
        let lowered = sandwich_series(rho0.mat(), &ops.a, &ops.a_dagger, e_coef, self.max_series_index);

        // e^{(−iωt − ln F)N} · … · e^{(iωt − ln F)N}, N diagonal.
        let left: Vec<C64> = (0..d)
            .map(|j| C64::from_polar((-ln_f * j as f64).exp(), -omega_t * j as f64))
            .collect();
        let right: Vec<C64> = left.iter().map(|z| z.conj()).collect();
        let middle = lowered.scale_rows_cols(&left, &right);

        // Σₙ Gⁿ/n! (a†)ⁿ · … · aⁿ
        let raised = sandwich_series(&middle, &ops.a_dagger, &ops.a, g_coef, self.max_series_index);
        let out = raised.scale_real(self.prefactor);
        if !out.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(DensityMatrix::from_evolution(out, self.trunc))
    }
}

/// `Σ_{k=0}^{max} cᵏ/k! · leftᵏ X rightᵏ`, accumulating one sandwich per term.
fn sandwich_series(
    x: &ComplexMatrix,
    left: &ComplexMatrix,
    right: &ComplexMatrix,
    c: f64,
    max: usize,
) -> ComplexMatrix {
    let mut acc = x.clone();
    if c == 0.0 {
        return acc;
    }
    let mut term = x.clone();
    for k in 1..=max {
        term = left.matmul(&term).matmul(right).scale_real(c / k as f64);
        if term.iter().all(|z| *z == ZERO) {
            break;
        }
        acc.add_scaled(C64::new(1.0, 0.0), &term);
    }
    acc
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Cheap admission check for states fed to the propagators: finite,
/// Hermitian and close to unit trace. Positivity is not re-derived here.
fn check_input(rho: &DensityMatrix) -> Result<()> {
    let m = rho.mat();
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = m.hermiticity_deviation() / m.max_abs().max(1.0);
    if herm > INPUT_HERMITICITY_TOL {
        return Err(Error::InvalidDensity(format!("hermiticity deviation {herm:e}")));
    }
    let trace_dev = (m.trace() - C64::new(1.0, 0.0)).norm();
    if trace_dev > INPUT_TRACE_TOL {
        return Err(Error::InvalidDensity(format!("trace deviation {trace_dev:e}")));
    }
    Ok(())
}

/// The dissipative part only (`ω = 0`, `θ = 0`).
pub fn evolve_lindblad_only(rho0: &DensityMatrix, mu: f64, nu: f64, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    let params = ModelParams::new(0.0, mu, nu)?;
    PropagatorPlan::new(&params, rho0.trunc(), t)?.apply(rho0)
}

/// Full solution of the damped oscillator master equation.
pub fn evolve_analytic(rho0: &DensityMatrix, params: &ModelParams, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    PropagatorPlan::new(params, rho0.trunc(), t)?.apply(rho0)
}

/// Pure damping (`ν = 0`), evaluated directly:
///
/// ```text
/// ρ(t) = e^{−(μ/2 + iω)tN} { Σₘ (1 − e^{−μt})ᵐ/m! aᵐ ρ(0) (a†)ᵐ } e^{−(μ/2 − iω)tN}
/// ```
pub fn evolve_nu_zero(rho0: &DensityMatrix, mu: f64, omega: f64, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    ModelParams::new(omega, mu, 0.0)?;
    check_input(rho0)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let d = rho0.dim();
    let ops = build_operators(rho0.trunc(), 0.0);
    let loss = -(-mu * t).exp_m1();
    let lowered = sandwich_series(rho0.mat(), &ops.a, &ops.a_dagger, loss, d - 1);
    let left: Vec<C64> = (0..d)
        .map(|j| (C64::new(-0.5 * mu, -omega) * (t * j as f64)).exp())
        .collect();
    let right: Vec<C64> = (0..d)
        .map(|j| (C64::new(-0.5 * mu, omega) * (t * j as f64)).exp())
        .collect();
    let out = lowered.scale_rows_cols(&left, &right);
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(DensityMatrix::from_evolution(out, *rho0.trunc()))
}

/// Outcome of re-running an evolution at twice the dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationCheck {
    /// Frobenius distance between the `D`-level result, zero-padded, and the
    /// full `2D`-level result.
    pub distance: f64,
    pub converged: bool,
}

/// Runs `evolve` at the state's dimension and at twice that dimension.
///
/// The whole doubled result is compared, not only its leading block: the
/// analytic propagator reproduces the leading block exactly at any size, so
/// its truncation error shows up only as weight above level `D − 1`.
pub fn check_truncation<F>(rho0: &DensityMatrix, evolve: F) -> Result<TruncationCheck>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let doubled = rho0.trunc().doubled();
    let small = evolve(rho0)?;
    let big = evolve(&rho0.embed(doubled)?)?;
    let distance = (&small.mat().embed(doubled.dim()) - big.mat()).frobenius_norm();
    Ok(TruncationCheck { distance, converged: distance <= TRUNCATION_CHECK_TOL })
}
