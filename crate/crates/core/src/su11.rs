//! The 2×2 su(1,1) machinery behind the closed-form propagator.
//!
//! The dissipative generator `t(νK₊ + μK₋ − (μ+ν)K₃)` is the image of
//! `tA = t(νk₊ + μk₋ − (μ+ν)k₃)` in the defining representation, with
//!
//! ```text
//! A = [[−(μ+ν)/2,  ν       ],
//!      [−μ,        (μ+ν)/2 ]]
//! ```
//!
//! Gauss-decomposing `e^{tA}` into upper-unitriangular × diagonal ×
//! lower-unitriangular factors yields the ordered product
//! `e^{G k₊} · e^{−2 ln F · k₃} · e^{E k₋}` and hence the coefficients
//! `E(t)`, `F(t)`, `G(t)` used by the propagator.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::matrix::{C64, ONE, ZERO};

/// Below this value of `|μ − ν|·t/2` the closed forms are 0/0 and their
/// `μ → ν` limits are used instead.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Determinant tolerance for [`gauss_decompose`], relative to `|ad| + |bc|`.
pub const UNIMODULAR_TOL: f64 = 1e-10;

const SINGULAR_TOL: f64 = 1e-12;

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoByTwo(pub [C64; 4]);

impl TwoByTwo {
    pub const IDENTITY: Self = Self([ONE, ZERO, ZERO, ONE]);
    pub const ZERO: Self = Self([ZERO; 4]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self([a, b, c, d])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self([C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0)])
    }

    pub fn a(&self) -> C64 {
        self.0[0]
    }

    pub fn b(&self) -> C64 {
        self.0[1]
    }

    pub fn c(&self) -> C64 {
        self.0[2]
    }

    pub fn d(&self) -> C64 {
        self.0[3]
    }

    pub fn det(&self) -> C64 {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn trace(&self) -> C64 {
        self.a() + self.d()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + other.0[k]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - other.0[k]))
    }

    pub fn transpose(&self) -> Self {
        Self([self.a(), self.c(), self.b(), self.d()])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        (*self * *other).sub(&(*other * *self))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for TwoByTwo {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        let l = self;
        Self([
            l.a() * r.a() + l.b() * r.c(),
            l.a() * r.b() + l.b() * r.d(),
            l.c() * r.a() + l.d() * r.c(),
            l.c() * r.b() + l.d() * r.d(),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGenerators {
    pub k_plus: TwoByTwo,
    pub k_minus: TwoByTwo,
    pub k3: TwoByTwo,
}

/// `k₊ = [[0,1],[0,0]]`, `k₋ = [[0,0],[−1,0]]`, `k₃ = diag(1/2, −1/2)`.
///
/// Note `k₋ = −k₊ᵀ`, not `k₊ᴴ`.
pub fn k_generators() -> KGenerators {
    KGenerators {
        k_plus: TwoByTwo::real(0.0, 1.0, 0.0, 0.0),
        k_minus: TwoByTwo::real(0.0, 0.0, -1.0, 0.0),
        k3: TwoByTwo::real(0.5, 0.0, 0.0, -0.5),
    }
}

/// The generator `A = νk₊ + μk₋ − (μ+ν)k₃`.
pub fn generator(mu: f64, nu: f64) -> TwoByTwo {
    let half_sum = 0.5 * (mu + nu);
    TwoByTwo::real(-half_sum, nu, -mu, half_sum)
}

/// `cosh(x)` and `sinh(x)/x` for `|x|` below the degeneracy threshold, by
/// their Taylor series (exact to rounding for `|x| ≤ 1e−3`).
fn small_cosh_sinhc(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let cosh = 1.0 + x2 / 2.0 * (1.0 + x2 / 12.0);
    let sinhc = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
    (cosh, sinhc)
}

/// Closed form of `e^{tA}`.
///
/// Away from `μ = ν` the entries are
/// `cosh x ∓ ((μ+ν)/(μ−ν)) sinh x`, `(2ν/(μ−ν)) sinh x` and
/// `−(2μ/(μ−ν)) sinh x` with `x = (μ−ν)t/2`. Near `μ = ν`, `A² = x²/t²·1`
/// gives `e^{tA} = cosh x · 1 + (sinh x / x) · tA`, which is evaluated with
/// series for `cosh` and `sinh x / x`.
pub fn exp_ta(mu: f64, nu: f64, t: f64) -> TwoByTwo {
    exp_ta_with(mu, nu, t, DEGENERACY_THRESHOLD)
}

pub fn exp_ta_with(mu: f64, nu: f64, t: f64, threshold: f64) -> TwoByTwo {
    let x = 0.5 * (mu - nu) * t;
    if x.abs() > threshold {
        let ratio = (mu + nu) / (mu - nu);
        let (sh, ch) = (x.sinh(), x.cosh());
        TwoByTwo::real(
            ch - ratio * sh,
            2.0 * nu / (mu - nu) * sh,
            -2.0 * mu / (mu - nu) * sh,
            ch + ratio * sh,
        )
    } else {
        let (ch, sinhc) = small_cosh_sinhc(x);
        let half_sum = 0.5 * (mu + nu);
        TwoByTwo::real(
            ch - sinhc * half_sum * t,
            sinhc * nu * t,
            -sinhc * mu * t,
            ch + sinhc * half_sum * t,
        )
    }
}

/// Factors of `[[a,b],[c,d]] = [[1,b/d],[0,1]] · diag(1/d, d) · [[1,0],[c/d,1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussFactors {
    pub upper: TwoByTwo,
    pub diagonal: TwoByTwo,
    pub lower: TwoByTwo,
}

impl GaussFactors {
    pub fn product(&self) -> TwoByTwo {
        self.upper * self.diagonal * self.lower
    }
}

/// Gauss decomposition of a determinant-one 2×2 matrix.
pub fn gauss_decompose(m: &TwoByTwo) -> Result<GaussFactors> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let det = m.det();
    let scale = (m.a() * m.d()).norm() + (m.b() * m.c()).norm();
    if (det - ONE).norm() > UNIMODULAR_TOL * scale.max(1.0) {
        return Err(Error::NotUnimodular(det.norm()));
    }
    let d = m.d();
    if d.norm() <= SINGULAR_TOL {
        return Err(Error::SingularGauss(d.norm()));
    }
    Ok(GaussFactors {
        upper: TwoByTwo::new(ONE, m.b() / d, ZERO, ONE),
        diagonal: TwoByTwo::new(ONE / d, ZERO, ZERO, d),
        lower: TwoByTwo::new(ONE, ZERO, m.c() / d, ONE),
    })
}

/// The disentangling coefficients at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisentanglingCoefficients {
    /// `E(t)`, multiplying `K₋`.
    pub e_coef: f64,
    /// `F(t) > 0`; `−2 ln F` multiplies `K₃`.
    pub f_coef: f64,
    /// `G(t)`, multiplying `K₊`.
    pub g_coef: f64,
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    /// Set when the `μ → ν` limit formulas were used.
    pub degenerate_branch: bool,
}

impl DisentanglingCoefficients {
    /// `e^{G k₊} · e^{−2 ln F · k₃} · e^{E k₋}` in closed form: the first and
    /// last factors are unitriangular since `k±` are nilpotent, and the
    /// middle one is `diag(1/F, F)`.
    ///
    /// `e^{E k₋} = [[1, 0], [−E, 1]]` carries `−E` because `k₋` has its `−1`
    /// below the diagonal. The lower Gauss factor of `e^{tA}` has `c/d = −E`
    /// in the same slot, so both sides agree.
    pub fn disentangled_product(&self) -> TwoByTwo {
        let upper = TwoByTwo::real(1.0, self.g_coef, 0.0, 1.0);
        let diagonal = TwoByTwo::real(1.0 / self.f_coef, 0.0, 0.0, self.f_coef);
        let lower = TwoByTwo::real(1.0, 0.0, -self.e_coef, 1.0);
        upper * diagonal * lower
    }

    /// `e^{(μ−ν)t/2} / F(t)`, the scalar in front of the operator series.
    pub fn prefactor(&self) -> f64 {
        (0.5 * (self.mu - self.nu) * self.t).exp() / self.f_coef
    }
}

/// `E(t)`, `F(t)`, `G(t)` with the default degeneracy threshold.
pub fn efg(mu: f64, nu: f64, t: f64) -> Result<DisentanglingCoefficients> {
    efg_with(mu, nu, t, DEGENERACY_THRESHOLD)
}

/// `E(t)`, `F(t)`, `G(t)` for rates `μ, ν ≥ 0`.
///
/// With `x = (μ−ν)t/2`:
///
/// ```text
/// F = cosh x + ((μ+ν)/(μ−ν)) sinh x
/// E = (2μ/(μ−ν)) sinh x / F
/// G = (2ν/(μ−ν)) sinh x / F
/// ```
///
/// For `|x| ≤ threshold` the same quantities are written through
/// `sinh x / x`, which at `μ = ν` gives `F = 1 + μ̄t`, `E = μt/F`,
/// `G = νt/F` with `μ̄ = (μ+ν)/2`.
pub fn efg_with(mu: f64, nu: f64, t: f64, threshold: f64) -> Result<DisentanglingCoefficients> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    for (name, v) in [("mu", mu), ("nu", nu)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be finite and non-negative, got {v}"),
            });
        }
    }
    let x = 0.5 * (mu - nu) * t;
    let degenerate_branch = x.abs() <= threshold;
    let (e_coef, f_coef, g_coef) = if degenerate_branch {
        let (ch, sinhc) = small_cosh_sinhc(x);
        let f = ch + 0.5 * (mu + nu) * t * sinhc;
        (mu * t * sinhc / f, f, nu * t * sinhc / f)
    } else {
        let sh = x.sinh();
        let f = x.cosh() + (mu + nu) / (mu - nu) * sh;
        (2.0 * mu / (mu - nu) * sh / f, f, 2.0 * nu / (mu - nu) * sh / f)
    };
    debug_assert!(f_coef > 0.0);
    Ok(DisentanglingCoefficients { e_coef, f_coef, g_coef, t, mu, nu, degenerate_branch })
}
