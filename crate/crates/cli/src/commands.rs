//! The five CLI verbs. Each returns its output as a string so callers decide
//! where it goes; nothing is written when a run aborts.

use std::fmt::Write as _;

use log::warn;
use qdho_core::classical::{
    classical_rk4_min_steps, evolve_classical_analytic, evolve_classical_rk4, ClassicalParams, PhasePoint,
};
use qdho_core::fock::{build_operators, thermal_state, validate_density_with};
use qdho_core::identities::{run_all, IdentityReport, VerifyOptions};
use qdho_core::observables::{expect_n, frobenius_distance, photon_distribution, purity};
use qdho_core::propagator::{check_truncation, evolve_nu_zero, PropagatorPlan};
use qdho_core::superop::{evolve_numeric_expm, evolve_numeric_rk4, rk4_min_steps};
use qdho_core::{DensityMatrix, ModelParams, TruncationConfig};
use rayon::prelude::*;

use crate::config::{ClassicalConfig, Method, RunConfig};
use crate::error::{CliError, CliResult};

/// Pass threshold for the steady-state report, on both the photon number
/// and the distance to the thermal state.
pub const STEADY_TOL: f64 = 1e-4;

/// Relaxation times `1/(μ − ν)` the steady-state run waits.
pub const STEADY_HORIZON: f64 = 20.0;

/// Classical RK4 steps are chosen so that `h·max(ω, 2γ)` stays below this,
/// well inside the stability bound, to resolve `1e-8` agreement.
pub const CLASSICAL_STEP_PRODUCT: f64 = 0.005;

/// Round-trip-exact scientific notation: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn result_line(pass: bool, max_residual: f64) -> String {
    format!("RESULT {} max_residual={:e}", if pass { "pass" } else { "fail" }, max_residual)
}

/// Evolves `rho0` to every time on the grid with one method.
///
/// Direct maps run one time point per task; RK4 steps along the grid.
pub fn evolve_series(cfg: &RunConfig, rho0: &DensityMatrix, method: Method, times: &[f64]) -> CliResult<Vec<DensityMatrix>> {
    let params = &cfg.params;
    let threshold = cfg.tolerances.degeneracy_threshold;
    let one = |rho: &DensityMatrix, t: f64| -> qdho_core::Result<DensityMatrix> {
        match method {
            Method::Analytic => PropagatorPlan::with_threshold(params, rho.trunc(), t, threshold)?.apply(rho),
            Method::NuZero => evolve_nu_zero(rho, params.mu, params.omega, t),
            Method::Expm => evolve_numeric_expm(rho, params, t),
            Method::Rk4 => unreachable!("stepped below"),
        }
    };
    let states: Vec<DensityMatrix> = match method {
        Method::Rk4 => rk4_series(rho0, params, times)?,
        _ => times
            .par_iter()
            .map(|&t| one(rho0, t).map_err(|e| CliError::from(e).context(format!("t = {t}"))))
            .collect::<CliResult<_>>()?,
    };
    if cfg.check_truncation {
        // Checked per point from the initial state, so RK4 is re-run directly.
        times.par_iter().try_for_each(|&t| {
            let check = match method {
                Method::Rk4 => check_truncation(rho0, |r| {
                    evolve_numeric_rk4(r, params, t, rk4_min_steps(params, r.dim(), t))
                }),
                _ => check_truncation(rho0, |r| one(r, t)),
            }
            .map_err(|e| CliError::from(e).context(format!("t = {t}")))?;
            if check.converged {
                Ok(())
            } else {
                Err(CliError::tolerance(format!(
                    "t = {t}: truncation check failed, doubling the dimension moves the state by {:e}",
                    check.distance
                )))
            }
        })?;
    }
    Ok(states)
}

fn rk4_series(rho0: &DensityMatrix, params: &ModelParams, times: &[f64]) -> CliResult<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(times.len());
    let mut current = rho0.clone();
    let mut t_prev = 0.0;
    for &t in times {
        let dt = t - t_prev;
        let steps = rk4_min_steps(params, rho0.dim(), dt);
        current = evolve_numeric_rk4(&current, params, dt, steps).map_err(|e| CliError::from(e).context(format!("t = {t}")))?;
        out.push(current.clone());
        t_prev = t;
    }
    Ok(out)
}

/// Observables of one evolved state.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub trace_re: f64,
    pub expect_n: f64,
    pub purity: f64,
    pub populations: Vec<f64>,
    pub min_eigenvalue: f64,
}

fn observe(cfg: &RunConfig, t: f64, rho: &DensityMatrix) -> CliResult<Row> {
    let at = |e: qdho_core::Error| CliError::from(e).context(format!("t = {t}"));
    if !rho.mat().is_finite() {
        return Err(CliError::numeric(format!("t = {t}: non-finite entries in the evolved state")));
    }
    let tol = &cfg.tolerances;
    let report = validate_density_with(rho.mat(), tol.hermiticity_tol, tol.trace_tol, tol.positivity_tol).map_err(at)?;
    if !report.passed() {
        return Err(CliError::tolerance(format!("t = {t}: evolved state fails validation: {}", report.summary())));
    }
    let ops = build_operators(rho.trunc(), cfg.params.theta);
    let mut populations = photon_distribution(rho);
    populations.truncate(cfg.photon_levels + 1);
    Ok(Row {
        t,
        trace_re: rho.mat().trace().re,
        expect_n: expect_n(rho, &ops).map_err(at)?,
        purity: purity(rho),
        populations,
        min_eigenvalue: report.min_eigenvalue,
    })
}

pub fn csv_header(photon_levels: usize) -> String {
    let mut h = String::from("t,trace_re,expect_n,purity");
    for k in 0..=photon_levels {
        write!(h, ",p{k}").unwrap();
    }
    h.push_str(",min_eigenvalue");
    h
}

impl Row {
    pub fn to_csv(&self) -> String {
        let mut fields = vec![fmt_f64(self.t), fmt_f64(self.trace_re), fmt_f64(self.expect_n), fmt_f64(self.purity)];
        fields.extend(self.populations.iter().map(|&p| fmt_f64(p)));
        fields.push(fmt_f64(self.min_eigenvalue));
        fields.join(",")
    }
}

pub fn evolve_rows(cfg: &RunConfig) -> CliResult<Vec<Row>> {
    let rho0 = cfg.initial_density()?;
    let times = cfg.time_grid.times();
    let states = evolve_series(cfg, &rho0, cfg.method, &times)?;
    times.par_iter().zip(states.par_iter()).map(|(&t, rho)| observe(cfg, t, rho)).collect()
}

pub fn cmd_evolve(cfg: &RunConfig) -> CliResult<String> {
    let rows = evolve_rows(cfg)?;
    let mut out = csv_header(cfg.photon_levels);
    out.push('\n');
    for row in &rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    Ok(out)
}

/// Largest pairwise distance between two methods over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistance {
    pub pair: (Method, Method),
    pub max_distance: f64,
    pub at_time: f64,
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Analytic => "analytic",
        Method::Expm => "expm",
        Method::Rk4 => "rk4",
        Method::NuZero => "nu-zero",
    }
}

/// Runs the analytic propagator and both oracles (plus the `ν = 0` closed
/// form when it applies) and collects the pairwise distances.
pub fn compare_methods(cfg: &RunConfig) -> CliResult<Vec<PairDistance>> {
    let rho0 = cfg.initial_density()?;
    let times = cfg.time_grid.times();
    let mut methods = vec![Method::Analytic, Method::Expm, Method::Rk4];
    if cfg.params.nu == 0.0 {
        methods.push(Method::NuZero);
    }
    let runs: Vec<Vec<DensityMatrix>> =
        methods.iter().map(|&m| evolve_series(cfg, &rho0, m, &times)).collect::<CliResult<_>>()?;
    let mut out = Vec::new();
    for a in 0..methods.len() {
        for b in a + 1..methods.len() {
            let mut worst = PairDistance { pair: (methods[a], methods[b]), max_distance: 0.0, at_time: times[0] };
            for (k, &t) in times.iter().enumerate() {
                let d = frobenius_distance(&runs[a][k], &runs[b][k])?;
                if !d.is_finite() {
                    return Err(CliError::numeric(format!("t = {t}: non-finite distance")));
                }
                if d > worst.max_distance {
                    worst.max_distance = d;
                    worst.at_time = t;
                }
            }
            out.push(worst);
        }
    }
    Ok(out)
}

/// Returns the report and whether every distance is within `oracle_tol`.
pub fn cmd_compare(cfg: &RunConfig) -> CliResult<(String, bool)> {
    let pairs = compare_methods(cfg)?;
    let tol = cfg.tolerances.oracle_tol;
    let mut out = String::new();
    let mut worst: f64 = 0.0;
    for p in &pairs {
        let ok = p.max_distance <= tol;
        worst = worst.max(p.max_distance);
        writeln!(
            out,
            "{:<18} max_distance={:.3e} at t={} tol={:.1e} {}",
            format!("{}-{}", method_name(p.pair.0), method_name(p.pair.1)),
            p.max_distance,
            p.at_time,
            tol,
            if ok { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    let pass = worst <= tol;
    writeln!(out, "{}", result_line(pass, worst)).unwrap();
    Ok((out, pass))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyReport {
    pub t: f64,
    pub n_bar: f64,
    pub expect_n: f64,
    pub thermal_distance: f64,
}

impl SteadyReport {
    pub fn deviation(&self) -> f64 {
        (self.expect_n - self.n_bar).abs()
    }

    pub fn passed(&self) -> bool {
        self.deviation() <= STEADY_TOL && self.thermal_distance <= STEADY_TOL
    }
}

/// Evolves `rho0` for [`STEADY_HORIZON`] relaxation times and compares the
/// result with the thermal state of mean photon number `ν/(μ − ν)`.
pub fn steady_state(params: &ModelParams, trunc: &TruncationConfig, rho0: &DensityMatrix) -> CliResult<SteadyReport> {
    if params.mu <= params.nu {
        return Err(qdho_core::Error::NoSteadyState { mu: params.mu, nu: params.nu }.into());
    }
    let gap = params.mu - params.nu;
    let n_bar = params.nu / gap;
    let t = STEADY_HORIZON / gap;
    let rho = PropagatorPlan::new(params, trunc, t)?.apply(rho0)?;
    if !rho.mat().is_finite() {
        return Err(CliError::numeric(format!("t = {t}: non-finite entries in the evolved state")));
    }
    let thermal = thermal_state(n_bar, trunc).map_err(|e| CliError::from(e).context("reference thermal state"))?;
    let ops = build_operators(trunc, params.theta);
    Ok(SteadyReport { t, n_bar, expect_n: expect_n(&rho, &ops)?, thermal_distance: frobenius_distance(&rho, &thermal)? })
}

pub fn cmd_steady(params: &ModelParams, trunc: &TruncationConfig, rho0: &DensityMatrix) -> CliResult<(String, bool)> {
    let r = steady_state(params, trunc, rho0)?;
    let mut out = String::new();
    writeln!(out, "t                 = {}", r.t).unwrap();
    writeln!(out, "target n_bar      = {}", r.n_bar).unwrap();
    writeln!(out, "expect_n          = {}", fmt_f64(r.expect_n)).unwrap();
    writeln!(out, "deviation         = {:.3e} tol={:.1e}", r.deviation(), STEADY_TOL).unwrap();
    writeln!(out, "thermal_distance  = {:.3e} tol={:.1e}", r.thermal_distance, STEADY_TOL).unwrap();
    writeln!(out, "{}", result_line(r.passed(), r.deviation().max(r.thermal_distance))).unwrap();
    Ok((out, r.passed()))
}

/// One classical sample; the analytic side is `None` when `ω ≤ γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRow {
    pub t: f64,
    pub analytic: Option<PhasePoint>,
    pub rk4: PhasePoint,
}

impl ClassicalRow {
    pub fn deviation(&self) -> Option<f64> {
        self.analytic.map(|a| a.distance(&self.rk4))
    }
}

pub fn classical_steps(params: &ClassicalParams, t: f64) -> usize {
    let rate = params.omega.max(2.0 * params.gamma);
    let fine = (t * rate / CLASSICAL_STEP_PRODUCT).ceil() as usize;
    fine.max(classical_rk4_min_steps(params, t))
}

pub fn classical_rows(cfg: &ClassicalConfig) -> CliResult<Vec<ClassicalRow>> {
    let p = &cfg.params;
    cfg.time_grid
        .times()
        .par_iter()
        .map(|&t| {
            let at = |e: qdho_core::Error| CliError::from(e).context(format!("t = {t}"));
            let analytic = if p.is_underdamped() {
                Some(evolve_classical_analytic(&cfg.p0, p, t).map_err(at)?)
            } else {
                None
            };
            let rk4 = evolve_classical_rk4(&cfg.p0, p, t, classical_steps(p, t)).map_err(at)?;
            if !(rk4.x.is_finite() && rk4.y.is_finite()) {
                return Err(CliError::numeric(format!("t = {t}: non-finite RK4 state")));
            }
            Ok(ClassicalRow { t, analytic, rk4 })
        })
        .collect()
}

pub fn cmd_classical(cfg: &ClassicalConfig) -> CliResult<String> {
    if !cfg.params.is_underdamped() {
        warn!(
            "analytic solution needs omega > gamma (omega = {}, gamma = {}); analytic columns left empty",
            cfg.params.omega, cfg.params.gamma
        );
    }
    let rows = classical_rows(cfg)?;
    let mut out = String::from("t,x_analytic,y_analytic,x_rk4,y_rk4,deviation\n");
    for r in &rows {
        let (xa, ya, dev) = match (r.analytic, r.deviation()) {
            (Some(a), Some(d)) => (fmt_f64(a.x), fmt_f64(a.y), fmt_f64(d)),
            _ => Default::default(),
        };
        writeln!(out, "{},{xa},{ya},{},{},{dev}", fmt_f64(r.t), fmt_f64(r.rk4.x), fmt_f64(r.rk4.y)).unwrap();
    }
    Ok(out)
}

pub fn cmd_verify(opts: &VerifyOptions) -> CliResult<(String, bool)> {
    let reports: Vec<IdentityReport> = run_all(opts)?;
    let mut out = String::new();
    for r in &reports {
        writeln!(out, "{r}").unwrap();
    }
    let pass = reports.iter().all(IdentityReport::passed);
    let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    writeln!(out, "{}", result_line(pass, worst)).unwrap();
    Ok((out, pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;
    use crate::error::Status;

    fn run_config(body: &str) -> RunConfig {
        ConfigFile::parse(body).unwrap().run_config(&[], false).unwrap()
    }

    fn model(omega: f64, mu: f64, nu: f64) -> String {
        format!("[model]\nomega = {omega}\nmu = {mu}\nnu = {nu}\n")
    }

    const FOCK1: &str = "[state]\nkind = \"fock\"\nn = 1\n[truncation]\nsupport_max = 1\n";

    fn parse_csv(text: &str) -> Vec<Vec<f64>> {
        text.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect()
    }

    #[test]
    fn single_photon_decay_rows() {
        let text = format!("{}{FOCK1}[time]\nend = 1.0\npoints = 2\n", model(0.0, 1.0, 0.0));
        for method in ["analytic", "expm", "rk4", "nu-zero"] {
            let cfg = run_config(&format!("{text}[run]\nmethod = \"{method}\"\n"));
            let rows = parse_csv(&cmd_evolve(&cfg).unwrap());
            assert_eq!(rows.len(), 2);
            assert_eq!(rows[0][2], 1.0);
            assert!((rows[1][2] - (-1.0f64).exp()).abs() <= 1e-8, "{method}: {}", rows[1][2]);
        }
    }

    #[test]
    fn header_and_format() {
        let text = format!("{}{FOCK1}[time]\nend = 1.0\npoints = 2\n[run]\nphoton_levels = 2\n", model(0.0, 1.0, 0.0));
        let out = cmd_evolve(&run_config(&text)).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "t,trace_re,expect_n,purity,p0,p1,p2,min_eigenvalue");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0.0000000000000000e0,1.0000000000000000e0,"), "{row}");
        // Every field round-trips exactly.
        for field in out.lines().nth(2).unwrap().split(',') {
            let x: f64 = field.parse().unwrap();
            assert_eq!(fmt_f64(x), field);
        }
        assert_eq!(fmt_f64(-(-1.0f64).exp()), "-3.6787944117144233e-1");
    }

    #[test]
    fn zero_length_grid_reproduces_initial_state() {
        let text = format!(
            "{}[state]\nkind = \"thermal\"\nn_bar = 0.5\n[truncation]\nsupport_max = 12\ndim = 30\n[time]\nend = 0.0\npoints = 1\n",
            model(2.0, 1.0, 0.3)
        );
        let rows = parse_csv(&cmd_evolve(&run_config(&text)).unwrap());
        assert_eq!(rows.len(), 1);
        let (trace, n, purity) = (rows[0][1], rows[0][2], rows[0][3]);
        assert!((trace - 1.0).abs() <= 1e-15);
        assert!((n - 0.5).abs() <= 1e-8);
        assert!((purity - 0.5).abs() <= 1e-8);
    }

    #[test]
    fn evolve_is_deterministic() {
        let text = format!(
            "{}[state]\nkind = \"coherent\"\nre = 0.8\nim = -0.3\n[truncation]\nsupport_max = 4\ndim = 16\n[time]\nend = 2.0\npoints = 9\n",
            model(3.0, 1.0, 0.2)
        );
        let cfg = run_config(&text);
        assert_eq!(cmd_evolve(&cfg).unwrap(), cmd_evolve(&cfg).unwrap());
    }

    #[test]
    fn failing_rows_name_the_time_point() {
        // Strong pumping in a small space leaks trace past trace_tol.
        let text = format!("{}{FOCK1}[time]\nend = 2.0\npoints = 3\n", model(0.0, 0.1, 2.0));
        let err = cmd_evolve(&run_config(&text)).unwrap_err();
        assert_eq!(err.status, Status::Tolerance);
        assert!(err.message.starts_with("t = 1:"), "{err}");
    }

    #[test]
    fn truncation_check_flags_leakage() {
        let text = format!("{}{FOCK1}[time]\nend = 1.0\npoints = 2\n", model(0.0, 0.2, 0.6));
        let cfg = ConfigFile::parse(&text).unwrap().run_config(&[("trace_tol".into(), 1e-2)], true).unwrap();
        let err = cmd_evolve(&cfg).unwrap_err();
        assert_eq!(err.status, Status::Tolerance);
        assert!(err.message.contains("truncation check"), "{err}");
    }

    fn compare_config(mu: f64, nu: f64, end: f64, points: usize) -> RunConfig {
        run_config(&format!(
            "{}[state]\nkind = \"coherent\"\nre = 1.0\nim = 0.0\n[truncation]\nsupport_max = 8\ndim = 24\n[time]\nend = {end:?}\npoints = {points}\n",
            model(std::f64::consts::TAU, mu, nu)
        ))
    }

    #[test]
    fn compare_physical_config() {
        let (report, pass) = cmd_compare(&compare_config(1.0, 0.4, 1.0, 2)).unwrap();
        assert!(pass, "{report}");
        assert!(report.lines().last().unwrap().starts_with("RESULT pass max_residual="));
    }

    #[test]
    fn compare_degenerate_config() {
        let pairs = compare_methods(&compare_config(0.5, 0.5, 1.0, 2)).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| p.max_distance <= 1e-7), "{pairs:?}");
    }

    #[test]
    fn compare_at_time_zero_is_exact() {
        let cfg = run_config(&format!(
            "{}{FOCK1}[time]\nend = 0.0\npoints = 1\n",
            model(1.0, 1.0, 0.0)
        ));
        let pairs = compare_methods(&cfg).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|p| p.max_distance == 0.0));
    }

    #[test]
    fn compare_reports_failure_against_tight_tolerance() {
        let mut cfg = compare_config(1.0, 0.4, 1.0, 2);
        cfg.tolerances.oracle_tol = 1e-14;
        let (report, pass) = cmd_compare(&cfg).unwrap();
        assert!(!pass);
        assert!(report.contains("RESULT fail"));
    }

    fn steady(mu: f64, nu: f64, dim: usize) -> CliResult<SteadyReport> {
        let trunc = TruncationConfig::from_dim(dim).unwrap();
        let rho0 = qdho_core::fock::coherent_state(qdho_core::C64::new(1.0, 0.5), &trunc).unwrap();
        steady_state(&ModelParams::new(1.0, mu, nu).unwrap(), &trunc, &rho0)
    }

    #[test]
    fn steady_vacuum_without_pumping() {
        let r = steady(1.0, 0.0, 16).unwrap();
        assert!(r.expect_n <= 1e-6);
        assert!(r.passed());
    }

    #[test]
    fn steady_thermal_fixed_point() {
        let r = steady(1.0, 0.5, 40).unwrap();
        assert_eq!(r.t, 40.0);
        assert!(r.deviation() <= 1e-4 && r.thermal_distance <= 1e-4, "{r:?}");
    }

    #[test]
    fn steady_needs_damping_to_win() {
        for (mu, nu) in [(0.5, 0.5), (0.2, 0.6)] {
            assert_eq!(steady(mu, nu, 16).unwrap_err().status, Status::Validation);
        }
    }

    fn classical(omega: f64, gamma: f64, end: f64, points: usize) -> ClassicalConfig {
        let text = format!("[classical]\nomega = {omega:?}\ngamma = {gamma:?}\nx0 = 1.0\ny0 = 0.0\n[time]\nend = {end:?}\npoints = {points}\n");
        ConfigFile::parse(&text).unwrap().classical_config().unwrap()
    }

    #[test]
    fn classical_full_period() {
        let rows = classical_rows(&classical(1.0, 0.0, 2.0 * std::f64::consts::PI, 2)).unwrap();
        let end = rows[1].analytic.unwrap();
        assert!((end.x - 1.0).abs() <= 1e-10 && end.y.abs() <= 1e-10);
    }

    #[test]
    fn classical_rk4_agrees() {
        let rows = classical_rows(&classical(2.0, 1.0, 10.0, 101)).unwrap();
        let worst = rows.iter().map(|r| r.deviation().unwrap()).fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn classical_overdamped_leaves_analytic_empty() {
        let out = cmd_classical(&classical(1.0, 2.0, 1.0, 2)).unwrap();
        let row = out.lines().nth(2).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert!(fields[1].is_empty() && fields[2].is_empty() && fields[5].is_empty());
        assert!(fields[3].parse::<f64>().is_ok());
    }

    #[test]
    fn verify_passes_and_detects_mutation() {
        let (report, pass) = cmd_verify(&VerifyOptions::default()).unwrap();
        assert!(pass, "{report}");
        assert_eq!(report.lines().count(), 8);
        let (report, pass) = cmd_verify(&VerifyOptions { flip_e_sign: true, ..Default::default() }).unwrap();
        assert!(!pass);
        assert!(report.lines().any(|l| l.starts_with("disentangling superoperator") && l.ends_with("FAIL")));
        assert!(report.ends_with(&format!("{}\n", report.lines().last().unwrap())));
        assert!(report.lines().last().unwrap().starts_with("RESULT fail max_residual="));
    }
}
