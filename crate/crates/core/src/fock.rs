//! Truncated Fock space: ladder operators, standard states and density-matrix
//! validation.
//!
//! Levels `0..D` are retained. On this space `a` and `a†` are nilpotent and the
//! canonical commutator `[a, a†] = 1` fails only at the top level `D − 1`.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::observables::hermitian_eigenvalues;

/// Trace tolerance for freshly prepared states.
pub const STATE_TRACE_TOL: f64 = 1e-10;

/// Largest acceptable norm lost to truncation when preparing a state.
pub const MAX_STATE_DEFICIT: f64 = 1e-8;

/// Number of retained Fock levels, split into the levels populated by the
/// initial state and a guard band above them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationConfig {
    dim: usize,
    support_max: usize,
    guard: usize,
}

impl TruncationConfig {
    /// Minimum guard band above `support_max` required for evolution runs.
    pub const GUARD_MARGIN: usize = 4;

    pub fn new(support_max: usize, guard: usize) -> Result<Self> {
        let dim = support_max + 1 + guard;
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self { dim, support_max, guard })
    }

    /// Truncation with the default guard band `support_max + 4`.
    pub fn for_support(support_max: usize) -> Self {
        Self::new(support_max, support_max + Self::GUARD_MARGIN)
            .expect("guard >= 4 gives dim >= 5")
    }

    /// Treats every level as potentially populated (no guard band).
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Self::new(dim - 1, 0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_max(&self) -> usize {
        self.support_max
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn meets_guard_policy(&self) -> bool {
        self.guard >= self.support_max + Self::GUARD_MARGIN
    }

    /// Same support, twice the dimension.
    pub fn doubled(&self) -> Self {
        Self::new(self.support_max, 2 * self.dim - self.support_max - 1)
            .expect("doubling keeps dim >= 2")
    }
}

/// Physical parameters of the damped oscillator master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Oscillator angular frequency ω.
    pub omega: f64,
    /// Damping (loss) rate μ.
    pub mu: f64,
    /// Pumping (gain) rate ν.
    pub nu: f64,
    /// Phase θ of the ladder operators, `a = e^{iθ} b`.
    pub theta: f64,
}

impl ModelParams {
    pub fn new(omega: f64, mu: f64, nu: f64) -> Result<Self> {
        let p = Self { omega, mu, nu, theta: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega", self.omega), ("mu", self.mu), ("nu", self.nu)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and non-negative, got {v}"),
                });
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn is_gain_dominant(&self) -> bool {
        self.nu > self.mu
    }
}

#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub a: ComplexMatrix,
    pub a_dagger: ComplexMatrix,
    pub n_op: ComplexMatrix,
    pub identity: ComplexMatrix,
}

/// Ladder and number operators on the truncated space, with `a = e^{iθ}·b`
/// where `b` has `√j` on the superdiagonal.
pub fn build_operators(trunc: &TruncationConfig, theta: f64) -> FockOperatorSet {
    let d = trunc.dim();
    let phase = C64::from_polar(1.0, theta);
    let a = ComplexMatrix::from_fn(d, d, |(i, j)| {
        if j == i + 1 {
            phase * (j as f64).sqrt()
        } else {
            ZERO
        }
    });
    let a_dagger = a.adjoint();
    let levels: Vec<f64> = (0..d).map(|n| n as f64).collect();
    FockOperatorSet {
        a,
        a_dagger,
        n_op: ComplexMatrix::from_real_diag(&levels),
        identity: ComplexMatrix::identity(d),
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    trunc: TruncationConfig,
}

impl DensityMatrix {
    /// Validates `mat` against the state invariants at `tol`.
    pub fn new(mat: ComplexMatrix, trunc: TruncationConfig, tol: f64) -> Result<Self> {
        if mat.rows() != trunc.dim() || mat.cols() != trunc.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for truncation dimension {}",
                mat.rows(),
                mat.cols(),
                trunc.dim()
            )));
        }
        let report = validate_density(&mat, tol)?;
        if !report.passed() {
            return Err(Error::InvalidDensity(report.summary()));
        }
        Ok(Self { mat, trunc })
    }

    /// Wraps an evolved matrix. Evolution leaks trace at the truncation edge,
    /// so callers validate the result against their own tolerances.
    pub(crate) fn from_evolution(mat: ComplexMatrix, trunc: TruncationConfig) -> Self {
        debug_assert_eq!(mat.rows(), trunc.dim());
        Self { mat, trunc }
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    /// Zero-pads into a larger truncation.
    pub fn embed(&self, trunc: TruncationConfig) -> Result<Self> {
        if trunc.dim() < self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot embed dimension {} into {}",
                self.dim(),
                trunc.dim()
            )));
        }
        Ok(Self { mat: self.mat.embed(trunc.dim()), trunc })
    }

    /// True when every matrix element touching a level above `max_level` is
    /// zero.
    pub fn is_supported_below(&self, max_level: usize) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| (i <= max_level && j <= max_level) || self.mat[(i, j)] == ZERO)
        })
    }
}

/// The number state `|n⟩⟨n|`.
pub fn fock_state(n: usize, trunc: &TruncationConfig) -> Result<DensityMatrix> {
    let d = trunc.dim();
    if n >= d {
        return Err(Error::LevelOutOfRange { level: n, dim: d });
    }
    let mut mat = ComplexMatrix::zeros(d, d);
    mat[(n, n)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix { mat, trunc: *trunc })
}

/// Incoherent mixture `Σ w_k |n_k⟩⟨n_k|`.
pub fn fock_mixture(terms: &[(usize, f64)], trunc: &TruncationConfig) -> Result<DensityMatrix> {
    let d = trunc.dim();
    let mut diag = vec![0.0; d];
    let mut total = 0.0;
    for &(n, w) in terms {
        if n >= d {
            return Err(Error::LevelOutOfRange { level: n, dim: d });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("mixture weights must be non-negative, got {w}"),
            });
        }
        diag[n] += w;
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "weight",
            reason: format!("mixture weights sum to {total}, expected 1"),
        });
    }
    Ok(DensityMatrix { mat: ComplexMatrix::from_real_diag(&diag), trunc: *trunc })
}

/// The coherent state `|α⟩⟨α|`, renormalized on the truncated space.
pub fn coherent_state(alpha: C64, trunc: &TruncationConfig) -> Result<DensityMatrix> {
    let d = trunc.dim();
    let mean = alpha.norm_sqr();
    if !mean.is_finite() || mean > trunc.support_max() as f64 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!(
                "|alpha|^2 = {mean} exceeds support_max = {}",
                trunc.support_max()
            ),
        });
    }
    let mut amps = Vec::with_capacity(d);
    let mut c = C64::new((-mean / 2.0).exp(), 0.0);
    for n in 0..d {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let deficit = 1.0 - kept;
    if deficit > MAX_STATE_DEFICIT {
        return Err(Error::TruncationDeficit { deficit, limit: MAX_STATE_DEFICIT });
    }
    let norm = kept.sqrt();
    for c in &mut amps {
        *c /= norm;
    }
    let mat = ComplexMatrix::from_fn(d, d, |(i, j)| amps[i] * amps[j].conj());
    Ok(DensityMatrix { mat, trunc: *trunc })
}

/// Thermal state with mean occupation `n_bar`: weights `∝ (n̄/(n̄+1))ⁿ`.
pub fn thermal_state(n_bar: f64, trunc: &TruncationConfig) -> Result<DensityMatrix> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "n_bar",
            reason: format!("must be finite and non-negative, got {n_bar}"),
        });
    }
    let d = trunc.dim();
    let ratio = n_bar / (n_bar + 1.0);
    // Geometric tail mass beyond level D − 1.
    let tail = ratio.powi(d as i32);
    if tail > MAX_STATE_DEFICIT {
        return Err(Error::TruncationDeficit { deficit: tail, limit: MAX_STATE_DEFICIT });
    }
    let mut weights: Vec<f64> = std::iter::successors(Some(1.0), |w| Some(w * ratio))
        .take(d)
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(DensityMatrix { mat: ComplexMatrix::from_real_diag(&weights), trunc: *trunc })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }

    pub fn summary(&self) -> String {
        format!(
            "hermiticity {:e} ({}), trace {:e} ({}), min eigenvalue {:e} ({})",
            self.hermiticity_deviation,
            pass_fail(self.hermitian),
            self.trace_deviation,
            pass_fail(self.unit_trace),
            self.min_eigenvalue,
            pass_fail(self.positive),
        )
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Checks Hermiticity, unit trace and positivity with a single tolerance.
pub fn validate_density(rho: &ComplexMatrix, tol: f64) -> Result<ValidationReport> {
    validate_density_with(rho, tol, tol, tol)
}

/// Checks the density-matrix invariants with separate tolerances. The
/// Hermiticity deviation is measured relative to `max(1, max|ρ|)`; the
/// spectrum is taken of the Hermitian part.
pub fn validate_density_with(
    rho: &ComplexMatrix,
    hermiticity_tol: f64,
    trace_tol: f64,
    positivity_tol: f64,
) -> Result<ValidationReport> {
    rho.dim()?;
    if !rho.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = rho.max_abs().max(1.0);
    let hermiticity_deviation = rho.hermiticity_deviation() / scale;
    let trace_deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let herm_part = (rho + &rho.adjoint()).scale_real(0.5);
    let spectrum = hermitian_eigenvalues(&herm_part, 1e-14 * scale)?;
    let min_eigenvalue = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(ValidationReport {
        hermiticity_deviation,
        trace_deviation,
        min_eigenvalue,
        hermitian: hermiticity_deviation <= hermiticity_tol,
        unit_trace: trace_deviation <= trace_tol,
        positive: min_eigenvalue >= -positivity_tol,
    })
}
