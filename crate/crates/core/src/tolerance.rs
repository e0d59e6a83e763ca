use crate::error::{Error, Result};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Max entry-wise `|ρ − ρᴴ|`, relative to `max(1, max|ρ|)`.
    pub hermiticity_tol: f64,
    /// Max `|Tr ρ − 1|` accepted on evolved states.
    pub trace_tol: f64,
    /// Smallest eigenvalue must be `≥ −positivity_tol`.
    pub positivity_tol: f64,
    /// Max Frobenius distance between the analytic propagator and the oracles.
    pub oracle_tol: f64,
    /// `|μ − ν|·t/2` at or below which the degenerate E, F, G formulas are used.
    pub degeneracy_threshold: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            hermiticity_tol: 1e-12,
            trace_tol: 1e-8,
            positivity_tol: 1e-9,
            oracle_tol: 1e-7,
            degeneracy_threshold: crate::su11::DEGENERACY_THRESHOLD,
        }
    }
}

impl ToleranceConfig {
    pub const MAX: f64 = 1e-2;

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !(value > 0.0 && value <= Self::MAX) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} is not in (0, {}]", Self::MAX),
                });
            }
        }
        Ok(())
    }

    pub fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("hermiticity_tol", self.hermiticity_tol),
            ("trace_tol", self.trace_tol),
            ("positivity_tol", self.positivity_tol),
            ("oracle_tol", self.oracle_tol),
            ("degeneracy_threshold", self.degeneracy_threshold),
        ]
    }

    /// Overrides one field by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let mut next = *self;
        let slot = match name {
            "hermiticity_tol" => &mut next.hermiticity_tol,
            "trace_tol" => &mut next.trace_tol,
            "positivity_tol" => &mut next.positivity_tol,
            "oracle_tol" => &mut next.oracle_tol,
            "degeneracy_threshold" => &mut next.degeneracy_threshold,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "tolerance",
                    reason: format!("unknown tolerance `{name}`"),
                })
            }
        };
        *slot = value;
        next.validate()?;
        *self = next;
        Ok(())
    }
}
