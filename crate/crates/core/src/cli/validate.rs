//! Built-in consistency suites behind `qbackflow validate`.

use clap::ValueEnum;
use serde::Serialize;

use crate::backflow::{
    asymptotic_threshold, bare_ddt, bare_distance, path_bracket, path_bracket_maximal, path_prefactor,
    path_prefactor_maximal, persistent_backflow_verdict, switch_bracket, switch_bracket_maximal, switch_prefactor,
    switch_prefactor_maximal, ControlMode, Dynamics, StatePairParams, TimeGrid, DEFAULT_EPS,
};
use crate::channel::{
    integrate_canonical, phi_t_kraus, validate_cptp, CanonicalGenerator, CptpReport, KrausChannel, COMPLETENESS_TOL,
    DEFAULT_DT,
};
use crate::control::{
    analytic_state_path, analytic_state_switch, controlled_output, path_kraus, switch_kraus, AmplitudeVectors,
    ControlConfig,
};
use crate::error::{Error, Result};
use crate::qmat::{trace_distance, ComplexMatrix, DensityOperator, C64, PSD_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Cptp,
    Ode,
    ClosedForm,
    Derivatives,
    Reductions,
    Thresholds,
}

/// One check: `passed` iff `value ≤ tolerance` (or, for CPTP Choi checks,
/// `value ≥ −tolerance`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn at_most(suite: &str, check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { suite: suite.into(), check: check.into(), passed: value <= tolerance, value, tolerance }
    }
}

const ODE_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-10;
const DERIVATIVE_TOL: f64 = 1e-6;
const REDUCTION_TOL: f64 = 1e-10;
const DERIVATIVE_STEP: f64 = 1e-4;

/// Runs the selected suites. `t` overrides the ODE evaluation times;
/// `perturbation` scales the identity Kraus operator of `φ_t` by
/// `1 + perturbation` in the CPTP suite.
pub fn run_suites(suite: Suite, t: Option<f64>, perturbation: Option<f64>) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    if wants(Suite::Cptp) {
        out.extend(cptp_suite(perturbation)?);
    }
    if wants(Suite::Ode) {
        out.extend(ode_suite(t)?);
    }
    if wants(Suite::ClosedForm) {
        out.extend(closed_form_suite()?);
    }
    if wants(Suite::Derivatives) {
        out.extend(derivative_suite()?);
    }
    if wants(Suite::Reductions) {
        out.extend(reduction_suite());
    }
    if wants(Suite::Thresholds) {
        out.extend(threshold_suite()?);
    }
    Ok(out)
}

fn time_grid_0_to_5() -> impl Iterator<Item = f64> {
    (0..=50).map(|k| k as f64 * 0.1)
}

fn phi_for_suite(t: f64, perturbation: Option<f64>) -> Result<KrausChannel> {
    let phi = phi_t_kraus(t)?;
    let Some(eps) = perturbation else { return Ok(phi) };
    let mut ops = phi.ops().to_vec();
    ops[2] = ops[2].scale_real(1.0 + eps);
    KrausChannel::unchecked(ops, format!("perturbed phi_t(t={t})"))
}

fn report_of(channel: Result<KrausChannel>) -> Result<CptpReport> {
    match channel {
        Ok(c) => Ok(validate_cptp(&c)),
        Err(Error::NotCptp { completeness, choi_min, .. }) => {
            Ok(CptpReport { completeness_residual: completeness, choi_min_eigenvalue: choi_min, passes: false })
        }
        Err(e) => Err(e),
    }
}

fn cptp_suite(perturbation: Option<f64>) -> Result<Vec<CheckResult>> {
    let amps = AmplitudeVectors::balanced_flips();
    let mut worst: [(f64, f64); 3] = [(0.0, f64::INFINITY); 3];
    for t in time_grid_0_to_5() {
        let phi = phi_for_suite(t, perturbation)?;
        let reports =
            [validate_cptp(&phi), report_of(switch_kraus(&phi, &phi))?, report_of(path_kraus(&phi, &phi, &amps))?];
        for (w, r) in worst.iter_mut().zip(&reports) {
            w.0 = w.0.max(r.completeness_residual);
            w.1 = w.1.min(r.choi_min_eigenvalue);
        }
    }
    let mut out = Vec::new();
    for (name, (completeness, choi_min)) in ["phi_t", "switch_joint", "path_joint"].iter().zip(worst) {
        out.push(CheckResult::at_most("cptp", format!("{name} completeness"), completeness, COMPLETENESS_TOL));
        out.push(CheckResult {
            suite: "cptp".into(),
            check: format!("{name} choi_min_eigenvalue"),
            passed: choi_min >= -PSD_TOL,
            value: choi_min,
            tolerance: PSD_TOL,
        });
    }
    Ok(out)
}

/// Fixed sample of qubit states: poles, equator, a mixed state with
/// complex coherence, and the probe `a = 0.65`.
fn sample_states() -> Result<Vec<DensityOperator>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(s, 0.0), C64::new(s, 0.0)],
        [C64::new(s, 0.0), C64::new(0.0, s)],
        [C64::new(0.65, 0.0), C64::new((1.0 - 0.65f64 * 0.65).sqrt(), 0.0)],
    ];
    let mut states: Vec<DensityOperator> = kets.iter().map(|k| DensityOperator::pure(k)).collect::<Result<_>>()?;
    let mixed = ComplexMatrix::from_row_major(
        2,
        &[C64::new(0.7, 0.0), C64::new(0.1, -0.2), C64::new(0.1, 0.2), C64::new(0.3, 0.0)],
    )?;
    states.push(DensityOperator::new(mixed)?);
    Ok(states)
}

fn ode_suite(t: Option<f64>) -> Result<Vec<CheckResult>> {
    let times = match t {
        Some(t) => vec![t],
        None => vec![0.5, 1.0, 2.0, 5.0],
    };
    let gen = CanonicalGenerator::eternal_non_markovian();
    let states = sample_states()?;
    let mut out = Vec::new();
    for t in times {
        let phi = phi_t_kraus(t)?;
        let mut worst = 0.0f64;
        for rho in &states {
            let ode = integrate_canonical(&gen, rho, t, DEFAULT_DT)?;
            worst = worst.max(trace_distance(&phi.apply(rho)?, &ode)?);
        }
        out.push(CheckResult::at_most("ode", format!("kraus_vs_rk4 t={t}"), worst, ODE_TOL));
    }
    Ok(out)
}

fn closed_form_suite() -> Result<Vec<CheckResult>> {
    let states = sample_states()?;
    let mut worst_path = 0.0f64;
    let mut worst_switch = 0.0f64;
    for t in (1..=50).map(|k| k as f64 * 0.1) {
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (path, switch) = (ControlConfig::path(p)?, ControlConfig::switch(p)?);
            for rho in &states {
                let direct = controlled_output(&path, rho, t)?.state;
                let closed = analytic_state_path(rho, t, p)?;
                worst_path = worst_path.max(direct.matrix().max_abs_diff(closed.matrix())?);
                let direct = controlled_output(&switch, rho, t)?.state;
                let closed = analytic_state_switch(rho, t, p)?;
                worst_switch = worst_switch.max(direct.matrix().max_abs_diff(closed.matrix())?);
            }
        }
    }
    Ok(vec![
        CheckResult::at_most("closed-form", "path_vs_supermap", worst_path, CLOSED_FORM_TOL),
        CheckResult::at_most("closed-form", "switch_vs_supermap", worst_switch, CLOSED_FORM_TOL),
    ])
}

fn derivative_suite() -> Result<Vec<CheckResult>> {
    let times = [0.05, 0.2, 0.5, 1.0, 2.0, 5.0];
    let a_values = [0.2, 0.5, 0.65, 0.9];
    let mut worst_bare = 0.0f64;
    for &a in &a_values {
        for &t in &times {
            let h = DERIVATIVE_STEP;
            let fd = (bare_distance(a, t + h) - bare_distance(a, t - h)) / (2.0 * h);
            worst_bare = worst_bare.max((fd - bare_ddt(a, t)).abs());
        }
    }
    let mut out = vec![CheckResult::at_most("derivatives", "bare", worst_bare, DERIVATIVE_TOL)];
    for mode in [ControlMode::Path, ControlMode::Switch] {
        let mut worst = 0.0f64;
        for p in [0.0, 0.5, 1.0] {
            let dynamics = Dynamics::controlled(mode, p)?;
            for &a in &a_values {
                let probe = StatePairParams::new(a)?;
                for &t in &times {
                    let fd = dynamics.numeric_ddt(&probe, t, DERIVATIVE_STEP)?;
                    worst = worst.max((fd - mode.ddt(a, p, t)).abs());
                }
            }
        }
        out.push(CheckResult::at_most("derivatives", format!("{mode:?}").to_lowercase(), worst, DERIVATIVE_TOL));
    }
    Ok(out)
}

fn relative_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

fn reduction_suite() -> Vec<CheckResult> {
    let mut path = 0.0f64;
    let mut switch = 0.0f64;
    for a in [0.1, 0.4, 0.65, 0.8, 0.99] {
        for t in [0.0f64, 0.1, 0.5, 1.0, 2.0, 4.0] {
            let e = (2.0 * t).exp();
            path = path
                .max(relative_gap(path_bracket(a, 1.0, t), path_bracket_maximal(a, t)))
                .max(relative_gap(path_prefactor(a, 1.0, t), path_prefactor_maximal(a, t)));
            let factored = 2.0 * e * (e * e + 6.0 * e + 1.0) * switch_bracket_maximal(a, t);
            let general = switch_prefactor(a, 1.0, t) * switch_bracket(a, 1.0, t);
            let maximal = switch_prefactor_maximal(a, t) * switch_bracket_maximal(a, t);
            switch = switch.max(relative_gap(switch_bracket(a, 1.0, t), factored)).max(relative_gap(general, maximal));
        }
    }
    vec![
        CheckResult::at_most("reductions", "path_p1", path, REDUCTION_TOL),
        CheckResult::at_most("reductions", "switch_p1", switch, REDUCTION_TOL),
    ]
}

fn threshold_suite() -> Result<Vec<CheckResult>> {
    let grid = TimeGrid::default_log();
    let mut out = Vec::new();
    for mode in [ControlMode::Path, ControlMode::Switch] {
        let mut mismatches = 0u32;
        for p in [0.2, 0.5, 1.0] {
            let a_c = asymptotic_threshold(mode, p)?;
            mismatches += u32::from(!persistent_backflow_verdict(Some(mode), a_c - 0.01, p, &grid, DEFAULT_EPS));
            mismatches += u32::from(persistent_backflow_verdict(Some(mode), a_c + 0.01, p, &grid, DEFAULT_EPS));
        }
        out.push(CheckResult::at_most(
            "thresholds",
            format!("{mode:?} persistent verdict flips at threshold").to_lowercase(),
            f64::from(mismatches),
            0.0,
        ));
    }
    Ok(out)
}
