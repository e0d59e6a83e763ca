//! Scalar diagnostics of density matrices and a Hermitian eigensolver.

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperatorSet};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Inputs further than this from Hermitian (relative to their scale) are
/// rejected by the eigensolver.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
    /// Number of Jacobi sweeps performed.
    pub iterations: usize,
    /// Largest off-diagonal magnitude left after the final sweep.
    pub residual: f64,
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations, iterated until every off-diagonal entry is below `tol`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<SpectrumResult> {
    let n = m.dim()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.max_abs().max(1.0);
    let dev = m.hermiticity_deviation();
    if dev > HERMITIAN_INPUT_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }

    // Work on the exactly Hermitian part, row-major.
    let mut a: Vec<C64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                C64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        })
        .collect();
    let mut v: Vec<C64> = (0..n * n).map(|k| if k / n == k % n { ONE } else { ZERO }).collect();

    let off_max = |a: &[C64]| {
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                r = r.max(a[i * n + j].norm());
            }
        }
        r
    };

    let mut sweeps = 0;
    let mut residual = off_max(&a);
    while residual > tol && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
        residual = off_max(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |(i, k)| v[i * n + order[k]]);
    Ok(SpectrumResult { eigenvalues, eigenvectors, iterations: sweeps, residual })
}

/// One unitary rotation zeroing `a[p][q]`.
///
/// With `a[p][q] = |β|e^{iφ}`, the phase `diag(1, e^{−iφ})` makes the pivot
/// block real symmetric, after which the classical Jacobi angle applies:
/// `U = [[c, s], [−s e^{−iφ}, c e^{−iφ}]]` on columns `(p, q)`.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let phase = apq / beta; // e^{iφ}
    let tau = (aqq - app) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // A ← A·U
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * ph_conj * s;
        a[k * n + q] = akp * s + akq * ph_conj * c;
    }
    // A ← Uᴴ·A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * phase * s;
        a[q * n + k] = apk * s + aqk * phase * c;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(app - t * beta, 0.0);
    a[q * n + q] = C64::new(aqq + t * beta, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * ph_conj * s;
        v[k * n + q] = vkp * s + vkq * ph_conj * c;
    }
}

/// Mean photon number `Re Tr(N ρ)`.
pub fn expect_n(rho: &DensityMatrix, ops: &FockOperatorSet) -> Result<f64> {
    if ops.n_op.rows() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators of dimension {} for a state of dimension {}",
            ops.n_op.rows(),
            rho.dim()
        )));
    }
    let value = ops.n_op.matmul(rho.mat()).trace();
    debug_assert!(value.im.abs() <= 1e-10 * value.re.abs().max(1.0), "Tr(Nρ) = {value}");
    Ok(value.re)
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(ρ²) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ.
    let m = rho.mat();
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (m[(i, j)] * m[(j, i)]).re;
        }
    }
    acc
}

pub fn frobenius_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok((a.mat() - b.mat()).frobenius_norm())
}

/// Diagonal populations `(p₀, …, p_{D−1})`.
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.mat().diagonal().iter().map(|z| z.re).collect()
}
