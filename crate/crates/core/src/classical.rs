//! The classical damped oscillator `ẍ + 2γẋ + ω²x = 0` (unit mass).
//!
//! In phase space `(x, y = ẋ)` the system matrix splits as
//! `[[0, 1], [−ω², −2γ]] = −γ·1 + k₊ + ω²k₋ + 2γk₃`, and for `ω > γ` the
//! traceless part exponentiates to sines and cosines of `√(ω² − γ²)·t`.

use crate::error::{Error, Result};
use crate::su11::{k_generators, TwoByTwo};

/// `h·max(ω, 2γ)` must not exceed this for RK4.
pub const RK4_STABILITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams {
    pub omega: f64,
    pub gamma: f64,
}

impl ClassicalParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be positive and finite, got {omega}"),
            });
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be non-negative and finite, got {gamma}"),
            });
        }
        Ok(Self { omega, gamma })
    }

    pub fn is_underdamped(&self) -> bool {
        self.omega > self.gamma
    }

    /// `[[0, 1], [−ω², −2γ]]`.
    pub fn system_matrix(&self) -> TwoByTwo {
        TwoByTwo::real(0.0, 1.0, -self.omega * self.omega, -2.0 * self.gamma)
    }

    /// `−γ·1 + k₊ + ω²k₋ + 2γk₃`.
    pub fn su11_split(&self) -> TwoByTwo {
        let k = k_generators();
        TwoByTwo::IDENTITY
            .scale_real(-self.gamma)
            .add(&k.k_plus)
            .add(&k.k_minus.scale_real(self.omega * self.omega))
            .add(&k.k3.scale_real(2.0 * self.gamma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn apply(m: &[[f64; 2]; 2], p: &Self) -> Self {
        Self { x: m[0][0] * p.x + m[0][1] * p.y, y: m[1][0] * p.x + m[1][1] * p.y }
    }
}

/// The underdamped evolution matrix
///
/// ```text
/// e^{−γt} [[cos Ωt + γ sin Ωt / Ω,   sin Ωt / Ω          ],
///          [−ω² sin Ωt / Ω,          cos Ωt − γ sin Ωt / Ω]]
/// ```
///
/// with `Ω = √(ω² − γ²)`.
pub fn classical_propagator(params: &ClassicalParams, t: f64) -> Result<[[f64; 2]; 2]> {
    if !params.is_underdamped() {
        return Err(Error::UnsupportedRegime { omega: params.omega, gamma: params.gamma });
    }
    if !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let ClassicalParams { omega, gamma } = *params;
    let freq = (omega * omega - gamma * gamma).sqrt();
    let (s, c) = (freq * t).sin_cos();
    let sinc = s / freq;
    let decay = (-gamma * t).exp();
    Ok([
        [decay * (c + gamma * sinc), decay * sinc],
        [-decay * omega * omega * sinc, decay * (c - gamma * sinc)],
    ])
}

pub fn evolve_classical_analytic(p0: &PhasePoint, params: &ClassicalParams, t: f64) -> Result<PhasePoint> {
    let m = classical_propagator(params, t)?;
    Ok(PhasePoint::apply(&m, p0))
}

/// Smallest step count meeting the stability bound over `[0, t]`.
pub fn classical_rk4_min_steps(params: &ClassicalParams, t: f64) -> usize {
    let rate = params.omega.max(2.0 * params.gamma);
    ((t.abs() * rate / RK4_STABILITY_LIMIT).ceil() as usize).max(1)
}

pub fn evolve_classical_rk4(
    p0: &PhasePoint,
    params: &ClassicalParams,
    t: f64,
    steps: usize,
) -> Result<PhasePoint> {
    if steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "must be positive".into() });
    }
    if !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let h = t / steps as f64;
    let product = h.abs() * params.omega.max(2.0 * params.gamma);
    if product > RK4_STABILITY_LIMIT {
        return Err(Error::StepSize { h, product, limit: RK4_STABILITY_LIMIT });
    }
    let (w2, g2) = (params.omega * params.omega, 2.0 * params.gamma);
    let f = |x: f64, y: f64| (y, -w2 * x - g2 * y);
    let (mut x, mut y) = (p0.x, p0.y);
    for _ in 0..steps {
        let (k1x, k1y) = f(x, y);
        let (k2x, k2y) = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y);
        let (k3x, k3y) = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y);
        let (k4x, k4y) = f(x + h * k3x, y + h * k3y);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    }
    Ok(PhasePoint { x, y })
}
