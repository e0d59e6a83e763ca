//! Brute-force evolution on the vectorized density matrix.
//!
//! `X = (x_ij)` is stacked row by row into `X̂ = (x₁₁, x₁₂, …; x₂₁, …)ᵀ`. With
//! this layout `(AXB)^ = (A ⊗ Bᵀ)·X̂`, so the master equation becomes the
//! linear ODE `dρ̂/dt = L ρ̂` with
//!
//! ```text
//! L = −iωK₀ + νK₊ + μK₋ − (μ+ν)K₃ + ((μ−ν)/2)·1⊗1
//! K₀ = N⊗1 − 1⊗N,  K₃ = (N⊗1 + 1⊗N + 1⊗1)/2,  K₊ = b†⊗b†,  K₋ = b⊗b
//! ```

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::fock::{build_operators, DensityMatrix, ModelParams, TruncationConfig};
use crate::matrix::{ComplexMatrix, C64, I, ONE};

/// Default Taylor truncation for [`expm`].
pub const EXPM_TOL: f64 = 1e-16;

/// RK4 is rejected when `h·(ω+μ+ν)·D` exceeds this.
pub const RK4_STABILITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    vec: Vec<C64>,
    dim: usize,
}

impl VectorizedState {
    pub fn new(vec: Vec<C64>, dim: usize) -> Result<Self> {
        if vec.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} cannot hold a {dim}x{dim} matrix",
                vec.len()
            )));
        }
        Ok(Self { vec, dim })
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.vec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.vec
            .iter()
            .zip(&other.vec)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Row-major stacking of a square matrix.
pub fn vectorize(x: &ComplexMatrix) -> Result<VectorizedState> {
    let dim = x.dim()?;
    Ok(VectorizedState { vec: x.iter().copied().collect(), dim })
}

pub fn devectorize(v: &VectorizedState) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.dim, v.dim, |(i, j)| v.vec[i * v.dim + j])
}

/// A `D² × D²` operator on vectorized `D × D` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    mat: ComplexMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn new(mat: ComplexMatrix, dim: usize) -> Result<Self> {
        if mat.rows() != dim * dim || mat.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} superoperator for dimension {dim}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { mat, dim })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, v: &VectorizedState) -> VectorizedState {
        assert_eq!(v.dim, self.dim);
        let x = Array1::from(v.vec.clone());
        let y = self.mat.view().dot(&x);
        VectorizedState { vec: y.to_vec(), dim: self.dim }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { mat: self.mat.matmul(&other.mat), dim: self.dim }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { mat: self.mat.scale(s), dim: self.dim }
    }

    pub fn exp(&self) -> Result<Self> {
        Ok(Self { mat: expm(&self.mat, EXPM_TOL)?, dim: self.dim })
    }
}

/// `max |(AXB)^ − (A ⊗ Bᵀ) X̂|`.
pub fn sandwich_check(a: &ComplexMatrix, x: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let d = x.dim()?;
    if a.dim()? != d || b.dim()? != d {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, X is {d}x{d}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let lhs = vectorize(&a.matmul(x).matmul(b))?;
    let rhs = Superoperator { mat: a.kron(&b.transpose()), dim: d }.apply(&vectorize(x)?);
    Ok(lhs
        .vec
        .iter()
        .zip(&rhs.vec)
        .fold(0.0, |m, (p, q)| m.max((p - q).norm())))
}

#[derive(Debug, Clone)]
pub struct KSuperoperators {
    pub k0: Superoperator,
    pub k_plus: Superoperator,
    pub k_minus: Superoperator,
    pub k3: Superoperator,
}

impl KSuperoperators {
    /// `νK₊ + μK₋ − (μ+ν)K₃`.
    pub fn dissipative_generator(&self, mu: f64, nu: f64) -> Superoperator {
        let mut m = self.k_plus.mat.scale_real(nu);
        m.add_scaled(C64::new(mu, 0.0), &self.k_minus.mat);
        m.add_scaled(C64::new(-(mu + nu), 0.0), &self.k3.mat);
        Superoperator { mat: m, dim: self.k0.dim }
    }
}

/// The su(1,1) superoperators and `K₀`, built from the phase-free `b`.
pub fn k_superoperators(trunc: &TruncationConfig) -> KSuperoperators {
    let d = trunc.dim();
    let ops = build_operators(trunc, 0.0);
    let one = &ops.identity;
    let n_left = ops.n_op.kron(one);
    let n_right = one.kron(&ops.n_op);
    let wrap = |mat| Superoperator { mat, dim: d };
    let mut k3 = &n_left + &n_right;
    k3.add_scaled(ONE, &one.kron(one));
    KSuperoperators {
        k0: wrap(&n_left - &n_right),
        k_plus: wrap(ops.a_dagger.kron(&ops.a_dagger)),
        k_minus: wrap(ops.a.kron(&ops.a)),
        k3: wrap(k3.scale_real(0.5)),
    }
}

/// Liouvillian of the damped oscillator.
pub fn build_liouvillian(params: &ModelParams, trunc: &TruncationConfig) -> Superoperator {
    let k = k_superoperators(trunc);
    let mut l = k.dissipative_generator(params.mu, params.nu);
    l.mat.add_scaled(-I * params.omega, &k.k0.mat);
    let shift = 0.5 * (params.mu - params.nu);
    let d2 = trunc.dim() * trunc.dim();
    for i in 0..d2 {
        l.mat[(i, i)] += shift;
    }
    l
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The input is scaled by `2^s` until its max-row-sum norm is at most 0.5;
/// Taylor terms are summed until a term's norm drops below `tol` times the
/// partial sum's norm; the result is then squared `s` times.
pub fn expm(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let n = m.dim()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = m.max_row_sum();
    let mut squarings = 0i32;
    while norm / 2f64.powi(squarings) > 0.5 {
        squarings += 1;
    }
    let scaled = m.scale_real(0.5f64.powi(squarings));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=60 {
        term = term.matmul(&scaled).scale_real(1.0 / k as f64);
        sum.add_scaled(ONE, &term);
        if term.max_row_sum() <= tol * sum.max_row_sum() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(Error::NonFinite)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// `ρ(t) = devec(e^{tL} ρ̂(0))`.
pub fn evolve_numeric_expm(rho0: &DensityMatrix, params: &ModelParams, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    params.validate()?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let l = build_liouvillian(params, rho0.trunc());
    let propagator = l.scale(C64::new(t, 0.0)).exp()?;
    let out = propagator.apply(&vectorize(rho0.mat())?);
    Ok(DensityMatrix::from_evolution(devectorize(&out), *rho0.trunc()))
}

/// Right-hand side of the master equation in matrix form,
///
/// ```text
/// −iω[N,ρ] − (μ/2)(Nρ + ρN − 2aρa†) − (ν/2)(aa†ρ + ρaa† − 2a†ρa),
/// ```
///
/// evaluated entry-wise: `N` is diagonal and `a`, `a†` are single shifts, so
/// every term touches one entry of `ρ` and a step costs `O(D²)`. The phase of
/// `a` cancels in both sandwiches. `aa†` is taken as `N + 1` rather than the
/// product of the truncated ladder matrices, so that this integrates the same
/// truncated generator as [`build_liouvillian`]; the two differ only in the
/// corner entry.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    params: ModelParams,
    dim: usize,
    sqrt: Vec<f64>,
}

impl MasterEquation {
    pub fn new(params: &ModelParams, trunc: &TruncationConfig) -> Self {
        let dim = trunc.dim();
        let sqrt = (0..=dim).map(|j| (j as f64).sqrt()).collect();
        Self { params: *params, dim, sqrt }
    }

    pub fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let ModelParams { omega, mu, nu, .. } = self.params;
        let d = self.dim;
        let s = &self.sqrt;
        ComplexMatrix::from_fn(d, d, |(i, j)| {
            let (fi, fj) = (i as f64, j as f64);
            let diag = C64::new(-0.5 * mu * (fi + fj) - 0.5 * nu * (fi + fj + 2.0), -omega * (fi - fj));
            let mut out = diag * rho[(i, j)];
            if i + 1 < d && j + 1 < d {
                out += rho[(i + 1, j + 1)] * (mu * s[i + 1] * s[j + 1]);
            }
            if i > 0 && j > 0 {
                out += rho[(i - 1, j - 1)] * (nu * s[i] * s[j]);
            }
            out
        })
    }

    fn rk4_step(&self, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let half = C64::new(0.5 * h, 0.0);
        let k1 = self.rhs(rho);
        let mut y = rho.clone();
        y.add_scaled(half, &k1);
        let k2 = self.rhs(&y);
        let mut y = rho.clone();
        y.add_scaled(half, &k2);
        let k3 = self.rhs(&y);
        let mut y = rho.clone();
        y.add_scaled(C64::new(h, 0.0), &k3);
        let k4 = self.rhs(&y);

        let mut next = rho.clone();
        let w = h / 6.0;
        next.add_scaled(C64::new(w, 0.0), &k1);
        next.add_scaled(C64::new(2.0 * w, 0.0), &k2);
        next.add_scaled(C64::new(2.0 * w, 0.0), &k3);
        next.add_scaled(C64::new(w, 0.0), &k4);
        next
    }
}

/// Smallest step count satisfying the RK4 stability bound for horizon `t`.
pub fn rk4_min_steps(params: &ModelParams, dim: usize, t: f64) -> usize {
    let rate = (params.omega + params.mu + params.nu) * dim as f64;
    ((t * rate / RK4_STABILITY_LIMIT).ceil() as usize).max(1)
}

/// Fixed-step classical RK4 integration of the master equation.
pub fn evolve_numeric_rk4(
    rho0: &DensityMatrix,
    params: &ModelParams,
    t: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    check_time(t)?;
    params.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "must be positive".into() });
    }
    let h = t / steps as f64;
    let product = h * (params.omega + params.mu + params.nu) * rho0.dim() as f64;
    if product > RK4_STABILITY_LIMIT {
        return Err(Error::StepSize { h, product, limit: RK4_STABILITY_LIMIT });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let eq = MasterEquation::new(params, rho0.trunc());
    let mut rho = rho0.mat().clone();
    for _ in 0..steps {
        rho = eq.rk4_step(&rho, h);
    }
    if !rho.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(DensityMatrix::from_evolution(rho, *rho0.trunc()))
}

/// Largest off-diagonal magnitude.
pub fn off_diagonal_max(m: &ComplexMatrix) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                r = r.max(m[(i, j)].norm());
            }
        }
    }
    r
}
