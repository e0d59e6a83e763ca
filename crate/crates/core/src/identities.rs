//! Numerical checks of the algebraic identities the propagator rests on.
//!
//! Each suite evaluates one identity over a grid of inputs and reports the
//! largest residual found against its tolerance. The suites are shared by
//! the `verify` command and the acceptance tests.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fock::TruncationConfig;
use crate::matrix::{ComplexMatrix, C64};
use crate::su11::{efg, exp_ta, gauss_decompose, k_generators, DisentanglingCoefficients};
use crate::superop::{devectorize, k_superoperators, sandwich_check, vectorize, KSuperoperators, Superoperator};

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub name: &'static str,
    /// Number of evaluated cases.
    pub grid: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_residual.is_finite() && self.max_residual <= self.tolerance
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} grid={:<5} max_residual={:.3e} tol={:.1e} {}",
            self.name,
            self.grid,
            self.max_residual,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negates `E(t)` before it is used, to confirm the disentangling suites
    /// can fail.
    pub flip_e_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 20240917, flip_e_sign: false }
    }
}

/// `(μ, ν, t)` triples on `[0, 5]³`; every tenth point has `ν = μ` exactly and
/// the two after it sit at `|μ − ν| = 1e−9` and `1e−3`.
pub fn rate_grid(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let mu: f64 = rng.gen_range(0.0..5.0);
            let nu = match k % 10 {
                0 => mu,
                1 => mu + 1e-9,
                2 => (mu - 1e-3).abs(),
                _ => rng.gen_range(0.0..5.0),
            };
            (mu, nu, rng.gen_range(0.0..5.0))
        })
        .collect()
}

/// Rate points used by the superoperator disentangling suite.
pub const SUPEROP_POINTS: [(f64, f64, f64); 8] = [
    (1.0, 0.0, 0.5),
    (2.0, 0.0, 1.0),
    (0.5, 0.0, 2.0),
    (1.0, 0.3, 0.3),
    (0.5, 0.5, 0.2),
    (0.2, 0.6, 0.2),
    (3.0, 0.1, 1.0),
    (0.7, 0.7, 0.1),
];

pub fn random_matrix(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn coefficients(mu: f64, nu: f64, t: f64, flip_e_sign: bool) -> Result<DisentanglingCoefficients> {
    let mut c = efg(mu, nu, t)?;
    if flip_e_sign {
        c.e_coef = -c.e_coef;
    }
    Ok(c)
}

/// `(AXB)^ = (A ⊗ Bᵀ) X̂` on random complex triples.
pub fn vectorization_suite(dims: &[usize], per_dim: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for &d in dims {
        for _ in 0..per_dim {
            let (a, x, b) = (random_matrix(d, &mut rng), random_matrix(d, &mut rng), random_matrix(d, &mut rng));
            worst = worst.max(sandwich_check(&a, &x, &b)?);
        }
    }
    Ok(IdentityReport { name: "vectorization (AXB)^=(A(x)B^T)X^", grid: dims.len() * per_dim, max_residual: worst, tolerance: 1e-12 })
}

/// `[k₃,k₊] = k₊`, `[k₃,k₋] = −k₋`, `[k₊,k₋] = −2k₃`.
pub fn su11_commutator_suite() -> IdentityReport {
    let k = k_generators();
    let residuals = [
        k.k3.commutator(&k.k_plus).max_abs_diff(&k.k_plus),
        k.k3.commutator(&k.k_minus).max_abs_diff(&k.k_minus.scale_real(-1.0)),
        k.k_plus.commutator(&k.k_minus).max_abs_diff(&k.k3.scale_real(-2.0)),
    ];
    IdentityReport {
        name: "su(1,1) relations 2x2",
        grid: residuals.len(),
        max_residual: residuals.into_iter().fold(0.0, f64::max),
        tolerance: 1e-15,
    }
}

fn commutator(a: &Superoperator, b: &Superoperator) -> ComplexMatrix {
    a.mat().commutator(b.mat())
}

/// `[K₃,K₊] = K₊`, `[K₃,K₋] = −K₋` everywhere and `[K₊,K₋] = −2K₃` on the
/// basis states that touch no edge level. The last residual is relative to
/// the size of `[K₊,K₋]`, whose entries grow like `D²`.
pub fn k_commutator_suite(d: usize) -> Result<IdentityReport> {
    let k = k_superoperators(&TruncationConfig::from_dim(d)?);
    let mut worst = commutator(&k.k3, &k.k_plus).max_abs_diff(k.k_plus.mat());
    worst = worst.max(commutator(&k.k3, &k.k_minus).max_abs_diff(&k.k_minus.mat().scale_real(-1.0)));

    let mut defect = commutator(&k.k_plus, &k.k_minus);
    let scale = defect.max_abs().max(1.0);
    defect.add_scaled(C64::new(2.0, 0.0), k.k3.mat());
    let touches_edge = |idx: usize| idx / d == d - 1 || idx % d == d - 1;
    for r in 0..d * d {
        for c in 0..d * d {
            if !touches_edge(r) && !touches_edge(c) {
                worst = worst.max(defect[(r, c)].norm() / scale);
            }
        }
    }
    Ok(IdentityReport { name: "su(1,1) relations superoperator", grid: 3, max_residual: worst, tolerance: 1e-14 })
}

/// `[K₀, K₊] = [K₀, K₋] = [K₀, K₃] = 0`.
pub fn k0_commutativity_suite(dims: &[usize]) -> Result<IdentityReport> {
    let mut worst: f64 = 0.0;
    for &d in dims {
        let k = k_superoperators(&TruncationConfig::from_dim(d)?);
        for other in [&k.k_plus, &k.k_minus, &k.k3] {
            worst = worst.max(commutator(&k.k0, other).max_abs());
        }
    }
    Ok(IdentityReport { name: "K0 commutativity", grid: 3 * dims.len(), max_residual: worst, tolerance: 1e-14 })
}

/// Largest entry-wise gap between `e^{tA}` and `e^{G k₊}e^{−2 ln F k₃}e^{E k₋}`,
/// absolute and relative to `max(1, ‖e^{tA}‖_max)`.
pub fn two_by_two_disentangling_residuals(grid: &[(f64, f64, f64)], flip_e_sign: bool) -> Result<(f64, f64)> {
    let mut abs: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for &(mu, nu, t) in grid {
        let exact = exp_ta(mu, nu, t);
        let r = exact.max_abs_diff(&coefficients(mu, nu, t, flip_e_sign)?.disentangled_product());
        abs = abs.max(r);
        rel = rel.max(r / exact.max_abs().max(1.0));
    }
    Ok((abs, rel))
}

/// The disentangling identity in the defining representation. The residual
/// is relative to the size of `e^{tA}`, whose entries reach `~10⁵` on
/// `[0, 5]³`.
pub fn two_by_two_disentangling_suite(grid: &[(f64, f64, f64)], flip_e_sign: bool) -> Result<IdentityReport> {
    let (_, rel) = two_by_two_disentangling_residuals(grid, flip_e_sign)?;
    Ok(IdentityReport { name: "disentangling 2x2 (relative)", grid: grid.len(), max_residual: rel, tolerance: 1e-12 })
}

/// Gauss factors of `e^{tA}` multiply back to `e^{tA}` and carry
/// `(G, 1/F, −E)` in their free slots.
pub fn gauss_reconstruction_suite(grid: &[(f64, f64, f64)]) -> Result<IdentityReport> {
    let mut worst: f64 = 0.0;
    for &(mu, nu, t) in grid {
        let m = exp_ta(mu, nu, t);
        let scale = m.max_abs().max(1.0);
        let g = gauss_decompose(&m)?;
        worst = worst.max(g.product().max_abs_diff(&m) / scale);
        let c = efg(mu, nu, t)?;
        let slots = [
            (g.upper.b().re, c.g_coef),
            (g.diagonal.a().re, 1.0 / c.f_coef),
            (g.lower.c().re, -c.e_coef),
        ];
        for (got, want) in slots {
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    Ok(IdentityReport { name: "Gauss reconstruction", grid: grid.len(), max_residual: worst, tolerance: 1e-12 })
}

/// `e^{G K₊} e^{−2 ln F K₃} e^{E K₋}` on the `D × D` space.
pub fn factored_superoperator(k: &KSuperoperators, c: &DisentanglingCoefficients) -> Result<Superoperator> {
    let up = k.k_plus.scale(C64::new(c.g_coef, 0.0)).exp()?;
    let mid = k.k3.scale(C64::new(-2.0 * c.f_coef.ln(), 0.0)).exp()?;
    let lo = k.k_minus.scale(C64::new(c.e_coef, 0.0)).exp()?;
    Ok(up.compose(&mid).compose(&lo))
}

/// Settings of the superoperator disentangling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperopDisentangling {
    /// Dimension of the factored product.
    pub dim: usize,
    /// Random states live on levels `0..=support_max`.
    pub support_max: usize,
    /// Dimension at which `e^{t(νK₊ + μK₋ − (μ+ν)K₃)}` is formed; its leading
    /// block is compared. Equal to `dim` for a same-size comparison.
    pub generator_dim: usize,
    pub states: usize,
    pub seed: u64,
}

/// Frobenius residual per rate point between the exponential of the
/// dissipative generator and the factored product, maximized over random
/// states.
pub fn superop_disentangling_residuals(
    cfg: &SuperopDisentangling,
    points: &[(f64, f64, f64)],
    flip_e_sign: bool,
) -> Result<Vec<f64>> {
    let small = k_superoperators(&TruncationConfig::from_dim(cfg.dim)?);
    let big = if cfg.generator_dim == cfg.dim {
        small.clone()
    } else {
        k_superoperators(&TruncationConfig::from_dim(cfg.generator_dim)?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let states: Vec<ComplexMatrix> = (0..cfg.states)
        .map(|_| random_matrix(cfg.support_max + 1, &mut rng).embed(cfg.dim))
        .collect();
    let mut out = Vec::with_capacity(points.len());
    for &(mu, nu, t) in points {
        let c = coefficients(mu, nu, t, flip_e_sign)?;
        let generator = big.dissipative_generator(mu, nu).scale(C64::new(t, 0.0)).exp()?;
        let factored = factored_superoperator(&small, &c)?;
        let mut worst: f64 = 0.0;
        for x in &states {
            let lhs = devectorize(&generator.apply(&vectorize(&x.embed(cfg.generator_dim))?)).top_left(cfg.dim);
            let rhs = devectorize(&factored.apply(&vectorize(x)?));
            worst = worst.max((&lhs - &rhs).frobenius_norm());
        }
        out.push(worst);
    }
    Ok(out)
}

/// Superoperator disentangling with the generator formed at twice the
/// dimension, so that no path of the exact evolution is cut by the edge.
pub fn superop_disentangling_suite(seed: u64, flip_e_sign: bool) -> Result<IdentityReport> {
    let cfg = SuperopDisentangling { dim: 8, support_max: 4, generator_dim: 16, states: 10, seed };
    let residuals = superop_disentangling_residuals(&cfg, &SUPEROP_POINTS, flip_e_sign)?;
    Ok(IdentityReport {
        name: "disentangling superoperator",
        grid: SUPEROP_POINTS.len() * cfg.states,
        max_residual: residuals.into_iter().fold(0.0, f64::max),
        tolerance: 1e-9,
    })
}

/// Every suite, in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<IdentityReport>> {
    let grid = rate_grid(200, opts.seed);
    Ok(vec![
        vectorization_suite(&[2, 3, 5, 8], 25, opts.seed)?,
        su11_commutator_suite(),
        k_commutator_suite(6)?,
        k0_commutativity_suite(&[4, 8, 16])?,
        two_by_two_disentangling_suite(&grid, opts.flip_e_sign)?,
        gauss_reconstruction_suite(&grid)?,
        superop_disentangling_suite(opts.seed, opts.flip_e_sign)?,
    ])
}
