//! Run configuration files.
//!
//! The format is TOML restricted to the sections below; unknown sections and
//! keys are rejected.
//!
//! ```toml
//! [model]
//! omega = 6.283185307179586
//! mu = 1.0
//! nu = 0.4
//! theta = 0.0            # optional
//!
//! [state]
//! kind = "coherent"      # fock | coherent | thermal | mixture
//! re = 1.0
//! im = 0.0
//!
//! [truncation]
//! support_max = 8
//! guard = 15             # or dim = 24; default guard is support_max + 4
//!
//! [time]
//! start = 0.0
//! end = 3.0
//! points = 31
//!
//! [run]
//! method = "analytic"    # analytic | expm | rk4 | nu-zero
//! check_truncation = false
//! photon_levels = 6
//!
//! [tolerances]
//! oracle_tol = 1e-7
//!
//! [classical]
//! omega = 2.0
//! gamma = 1.0
//! x0 = 1.0
//! y0 = 0.0
//! ```

use std::path::Path;

use qdho_core::classical::{ClassicalParams, PhasePoint};
use qdho_core::fock::{coherent_state, fock_mixture, fock_state, thermal_state};
use qdho_core::{DensityMatrix, ModelParams, ToleranceConfig, TruncationConfig, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<RawModel>,
    state: Option<InitialState>,
    truncation: Option<RawTruncation>,
    time: Option<RawTime>,
    run: Option<RawRun>,
    tolerances: Option<RawTolerances>,
    classical: Option<RawClassical>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    omega: f64,
    mu: f64,
    nu: f64,
    #[serde(default)]
    theta: f64,
}

/// Initial density matrix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    Thermal { n_bar: f64 },
    Mixture { levels: Vec<usize>, weights: Vec<f64> },
}

impl InitialState {
    /// Highest level the state needs exactly, where that is finite.
    fn top_level(&self) -> Option<usize> {
        match self {
            InitialState::Fock { n } => Some(*n),
            InitialState::Mixture { levels, .. } => levels.iter().copied().max(),
            _ => None,
        }
    }

    pub fn build(&self, trunc: &TruncationConfig) -> CliResult<DensityMatrix> {
        let rho = match self {
            InitialState::Fock { n } => fock_state(*n, trunc),
            InitialState::Coherent { re, im } => coherent_state(C64::new(*re, *im), trunc),
            InitialState::Thermal { n_bar } => thermal_state(*n_bar, trunc),
            InitialState::Mixture { levels, weights } => {
                if levels.len() != weights.len() {
                    return Err(CliError::validation(format!(
                        "field `state.weights`: {} weights for {} levels",
                        weights.len(),
                        levels.len()
                    )));
                }
                if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
                    return Err(CliError::validation(format!("field `state.weights`: negative weight {w}")));
                }
                let terms: Vec<(usize, f64)> = levels.iter().copied().zip(weights.iter().copied()).collect();
                fock_mixture(&terms, trunc)
            }
        };
        rho.map_err(|e| CliError::from(e).context("section [state]"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncation {
    support_max: usize,
    guard: Option<usize>,
    dim: Option<usize>,
    #[serde(default = "yes")]
    enforce_guard: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(default)]
    start: f64,
    end: f64,
    points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    method: Method,
    #[serde(default)]
    check_truncation: bool,
    photon_levels: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    hermiticity_tol: Option<f64>,
    trace_tol: Option<f64>,
    positivity_tol: Option<f64>,
    oracle_tol: Option<f64>,
    degeneracy_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    omega: f64,
    gamma: f64,
    x0: f64,
    y0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Analytic,
    Expm,
    Rk4,
    NuZero,
}

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, points: usize) -> CliResult<Self> {
        if !(start.is_finite() && start >= 0.0) {
            return Err(CliError::validation(format!("field `time.start`: must be finite and >= 0, got {start}")));
        }
        if !(end.is_finite() && end >= start) {
            return Err(CliError::validation(format!("field `time.end`: must be finite and >= start, got {end}")));
        }
        if points == 0 {
            return Err(CliError::validation("field `time.points`: must be at least 1"));
        }
        if points == 1 && end != start {
            return Err(CliError::validation("field `time.points`: a single point needs start = end"));
        }
        Ok(Self { start, end, points })
    }

    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = self.points - 1;
        let span = self.end - self.start;
        (0..self.points)
            .map(|i| if i == last { self.end } else { self.start + span * i as f64 / last as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub initial_state: InitialState,
    pub trunc: TruncationConfig,
    pub time_grid: TimeGrid,
    pub method: Method,
    pub check_truncation: bool,
    pub tolerances: ToleranceConfig,
    /// Highest photon number reported as its own CSV column.
    pub photon_levels: usize,
}

impl RunConfig {
    pub fn initial_density(&self) -> CliResult<DensityMatrix> {
        self.initial_state.build(&self.trunc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalConfig {
    pub params: ClassicalParams,
    pub p0: PhasePoint,
    pub time_grid: TimeGrid,
}

/// A parsed config file; sections are resolved on demand since each
/// command needs a different subset.
#[derive(Debug)]
pub struct ConfigFile {
    raw: RawConfig,
}

fn missing(section: &str) -> CliError {
    CliError::validation(format!("missing section [{section}]"))
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text)
            .map(|raw| Self { raw })
            .map_err(|e| CliError::validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(path.display()))
    }

    pub fn empty() -> Self {
        Self { raw: RawConfig::default() }
    }

    pub fn model(&self) -> CliResult<ModelParams> {
        let m = self.raw.model.as_ref().ok_or_else(|| missing("model"))?;
        ModelParams::new(m.omega, m.mu, m.nu)
            .map(|p| p.with_theta(m.theta))
            .and_then(|p| p.validate().map(|_| p))
            .map_err(|e| CliError::from(e).context("section [model]"))
    }

    pub fn tolerances(&self, overrides: &[(String, f64)]) -> CliResult<ToleranceConfig> {
        let mut tol = ToleranceConfig::default();
        if let Some(t) = &self.raw.tolerances {
            let given = [
                ("hermiticity_tol", t.hermiticity_tol),
                ("trace_tol", t.trace_tol),
                ("positivity_tol", t.positivity_tol),
                ("oracle_tol", t.oracle_tol),
                ("degeneracy_threshold", t.degeneracy_threshold),
            ];
            for (name, value) in given {
                if let Some(v) = value {
                    tol.set(name, v).map_err(|e| CliError::from(e).context(format!("field `tolerances.{name}`")))?;
                }
            }
        }
        for (name, v) in overrides {
            tol.set(name, *v).map_err(|e| CliError::from(e).context(format!("--tol-override {name}")))?;
        }
        Ok(tol)
    }

    fn time_grid(&self) -> CliResult<TimeGrid> {
        let t = self.raw.time.as_ref().ok_or_else(|| missing("time"))?;
        TimeGrid::new(t.start, t.end, t.points)
    }

    fn truncation(&self, state: &InitialState) -> CliResult<TruncationConfig> {
        let t = self.raw.truncation.as_ref().ok_or_else(|| missing("truncation"))?;
        let guard = match (t.guard, t.dim) {
            (Some(_), Some(_)) => {
                return Err(CliError::validation("section [truncation]: give either `guard` or `dim`, not both"))
            }
            (Some(g), None) => g,
            (None, Some(d)) => d.checked_sub(t.support_max + 1).ok_or_else(|| {
                CliError::validation(format!("field `truncation.dim`: {d} leaves no room above support_max = {}", t.support_max))
            })?,
            (None, None) => t.support_max + TruncationConfig::GUARD_MARGIN,
        };
        let trunc = TruncationConfig::new(t.support_max, guard).map_err(|e| CliError::from(e).context("section [truncation]"))?;
        if t.enforce_guard && !trunc.meets_guard_policy() {
            return Err(CliError::validation(format!(
                "section [truncation]: guard {} is below support_max + {} = {} (set enforce_guard = false to allow)",
                trunc.guard(),
                TruncationConfig::GUARD_MARGIN,
                t.support_max + TruncationConfig::GUARD_MARGIN
            )));
        }
        if let Some(top) = state.top_level() {
            if top > t.support_max {
                return Err(CliError::validation(format!(
                    "section [state]: level {top} is above truncation.support_max = {}",
                    t.support_max
                )));
            }
        }
        Ok(trunc)
    }

    fn state(&self) -> CliResult<InitialState> {
        self.raw.state.clone().ok_or_else(|| missing("state"))
    }

    pub fn run_config(&self, overrides: &[(String, f64)], force_check: bool) -> CliResult<RunConfig> {
        let params = self.model()?;
        let initial_state = self.state()?;
        let trunc = self.truncation(&initial_state)?;
        let run = self.raw.run.as_ref();
        let method = run.map(|r| r.method).unwrap_or_default();
        if method == Method::NuZero && params.nu != 0.0 {
            return Err(CliError::validation(format!(
                "field `run.method`: nu-zero requires model.nu = 0, got {}",
                params.nu
            )));
        }
        let photon_levels = run.and_then(|r| r.photon_levels).unwrap_or(10).min(trunc.dim() - 1);
        Ok(RunConfig {
            params,
            initial_state,
            trunc,
            time_grid: self.time_grid()?,
            method,
            check_truncation: force_check || run.is_some_and(|r| r.check_truncation),
            tolerances: self.tolerances(overrides)?,
            photon_levels,
        })
    }

    /// Model, truncation and test state for the steady-state report. The
    /// test state defaults to the vacuum.
    pub fn steady_inputs(&self) -> CliResult<(ModelParams, TruncationConfig, DensityMatrix)> {
        let params = self.model()?;
        let state = self.raw.state.clone().unwrap_or(InitialState::Fock { n: 0 });
        let trunc = self.truncation(&state)?;
        let rho = state.build(&trunc)?;
        Ok((params, trunc, rho))
    }

    pub fn classical_config(&self) -> CliResult<ClassicalConfig> {
        let c = self.raw.classical.as_ref().ok_or_else(|| missing("classical"))?;
        let params = ClassicalParams::new(c.omega, c.gamma).map_err(|e| CliError::from(e).context("section [classical]"))?;
        Ok(ClassicalConfig { params, p0: PhasePoint::new(c.x0, c.y0), time_grid: self.time_grid()? })
    }
}

/// Parses `key=value` for `--tol-override`.
pub fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((key.trim().to_string(), value))
}
