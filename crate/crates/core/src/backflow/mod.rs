//! Information backflow: the trace distance between the probe pair
//! `ρ₁ = |0⟩⟨0|`, `ρ₂ = |ψ⟩⟨ψ|` with `|ψ⟩ = a|0⟩ + √(1−a²)|1⟩`, its time
//! derivative, and the detection of intervals where it grows.

mod formulas;
mod scan;

pub use formulas::*;
pub use scan::{
    asymptotic_threshold, empirical_boundary, scan_region, BoundaryCriterion, RegionScan, ScanCell, MAX_SCAN_CELLS,
};

use serde::Serialize;

use crate::channel::phi_t_kraus;
use crate::control::{
    analytic_state_path, analytic_state_switch, controlled_output, AmplitudeVectors, ControlConfig, Outcome, Supermap,
};
use crate::error::{Error, Result};
use crate::qmat::{trace_distance, DensityOperator, C64};

/// Default positivity threshold on `dD/dt`.
pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_T_MIN: f64 = 1e-2;
pub const DEFAULT_T_MAX: f64 = 12.0;
pub const DEFAULT_TIME_POINTS: usize = 2000;
/// Central-difference step.
pub const FD_STEP: f64 = 1e-4;

/// The probe pair parameter `a ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatePairParams {
    a: f64,
}

impl StatePairParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParameter(format!("probe parameter a must lie in (0, 1], got {a}")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        (1.0 - self.a * self.a).max(0.0).sqrt()
    }

    pub fn pair(&self) -> (DensityOperator, DensityOperator) {
        let psi = [C64::new(self.a, 0.0), C64::new(self.b(), 0.0)];
        let rho2 = DensityOperator::pure(&psi).expect("normalized by construction");
        (DensityOperator::basis(2, 0), rho2)
    }
}

/// The two coherent-control configurations covered by the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Path,
    Switch,
}

impl ControlMode {
    pub fn config(self, p: f64) -> Result<ControlConfig> {
        match self {
            ControlMode::Path => ControlConfig::path(p),
            ControlMode::Switch => ControlConfig::switch(p),
        }
    }

    pub fn ddt(self, a: f64, p: f64, t: f64) -> f64 {
        match self {
            ControlMode::Path => analytic_ddt_path(a, p, t),
            ControlMode::Switch => analytic_ddt_switch(a, p, t),
        }
    }
}

/// Dynamics applied to the probe pair.
#[derive(Clone, Debug, PartialEq)]
pub enum Dynamics {
    Bare,
    Controlled(ControlConfig),
}

impl Dynamics {
    pub fn controlled(mode: ControlMode, p: f64) -> Result<Self> {
        Ok(Dynamics::Controlled(mode.config(p)?))
    }

    /// Mode and `p` when a closed form describes these dynamics.
    fn closed_form(&self) -> Option<(ControlMode, f64)> {
        let Dynamics::Controlled(cfg) = self else { return None };
        if cfg.outcome != Outcome::Plus {
            return None;
        }
        let mode = match &cfg.supermap {
            Supermap::Switch => ControlMode::Switch,
            Supermap::Path(amps) if *amps == AmplitudeVectors::balanced_flips() => ControlMode::Path,
            Supermap::Path(_) => return None,
        };
        Some((mode, cfg.control.p()))
    }

    pub fn label(&self) -> String {
        match self {
            Dynamics::Bare => "bare".into(),
            Dynamics::Controlled(cfg) => {
                let kind = match cfg.supermap {
                    Supermap::Switch => "switch",
                    Supermap::Path(_) => "path",
                };
                format!("{kind}(p={}, outcome={:?})", cfg.control.p(), cfg.outcome).to_lowercase()
            }
        }
    }

    /// Evolved probe pair at time `t`.
    pub fn evolve_pair(&self, probe: &StatePairParams, t: f64) -> Result<(DensityOperator, DensityOperator)> {
        let (r1, r2) = probe.pair();
        match (self, self.closed_form()) {
            (Dynamics::Bare, _) => {
                let phi = phi_t_kraus(t)?;
                Ok((phi.apply(&r1)?, phi.apply(&r2)?))
            }
            (_, Some((ControlMode::Path, p))) => Ok((analytic_state_path(&r1, t, p)?, analytic_state_path(&r2, t, p)?)),
            (_, Some((ControlMode::Switch, p))) => {
                Ok((analytic_state_switch(&r1, t, p)?, analytic_state_switch(&r2, t, p)?))
            }
            (Dynamics::Controlled(cfg), None) => {
                Ok((controlled_output(cfg, &r1, t)?.state, controlled_output(cfg, &r2, t)?.state))
            }
        }
    }

    /// Trace distance of the evolved probe pair.
    pub fn distance(&self, probe: &StatePairParams, t: f64) -> Result<f64> {
        if let Dynamics::Bare = self {
            return Ok(bare_distance(probe.a(), t));
        }
        let (r1, r2) = self.evolve_pair(probe, t)?;
        trace_distance(&r1, &r2)
    }

    /// Closed-form `dD/dt`, if one exists for these dynamics.
    pub fn analytic_ddt(&self, probe: &StatePairParams, t: f64) -> Option<f64> {
        match (self, self.closed_form()) {
            (Dynamics::Bare, _) => Some(bare_ddt(probe.a(), t)),
            (_, Some((mode, p))) => Some(mode.ddt(probe.a(), p, t)),
            _ => None,
        }
    }

    /// Central difference of [`Dynamics::distance`] with step `h`.
    pub fn numeric_ddt(&self, probe: &StatePairParams, t: f64, h: f64) -> Result<f64> {
        let h = h.min(0.5 * t);
        Ok((self.distance(probe, t + h)? - self.distance(probe, t - h)?) / (2.0 * h))
    }
}

/// Richardson-extrapolated central difference `(4 D(h/2) − D(h)) / 3`.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let d = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Strictly increasing sample times, all positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        match points.first() {
            None => return Err(Error::InvalidParameter("time grid is empty".into())),
            Some(&t0) if t0.is_nan() || t0 <= 0.0 => {
                return Err(Error::InvalidParameter(format!("time grid must start at t > 0, got {t0}")))
            }
            _ => {}
        }
        if points.iter().any(|t| !t.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n` logarithmically spaced points from `t_min` to `t_max` inclusive.
    pub fn logarithmic(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 2 || t_min.is_nan() || t_min <= 0.0 || t_max.is_nan() || t_max <= t_min {
            return Err(Error::InvalidParameter(format!(
                "logarithmic grid needs 0 < t_min < t_max and n ≥ 2, got ({t_min}, {t_max}, {n})"
            )));
        }
        let (l0, l1) = (t_min.ln(), t_max.ln());
        let step = (l1 - l0) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|k| (l0 + step * k as f64).exp()).collect();
        points[0] = t_min;
        points[n - 1] = t_max;
        Self::from_points(points)
    }

    /// `n` evenly spaced points from `t_min` to `t_max` inclusive.
    pub fn linear(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 2 || t_min.is_nan() || t_max.is_nan() || t_max <= t_min {
            return Err(Error::InvalidParameter(format!(
                "linear grid needs t_min < t_max and n ≥ 2, got ({t_min}, {t_max}, {n})"
            )));
        }
        let step = (t_max - t_min) / (n - 1) as f64;
        Self::from_points((0..n).map(|k| t_min + step * k as f64).collect())
    }

    pub fn default_log() -> Self {
        Self::logarithmic(DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_TIME_POINTS).unwrap()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackflowReport {
    pub dynamics: String,
    pub a: f64,
    pub eps: f64,
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    /// Closed-form derivative where available, otherwise the numeric one.
    pub derivative: Vec<f64>,
    pub derivative_fd: Vec<f64>,
    pub backflow_intervals: Vec<(f64, f64)>,
    pub verdict: bool,
    /// The last sample with `|derivative| > eps` is positive: backflow is
    /// still under way when the signal fades or the window ends.
    pub persists: bool,
    /// Backflow detected, but the largest derivative is below `10 · eps`.
    pub marginal: bool,
    pub max_derivative: f64,
    /// `max |derivative − derivative_fd|`; zero when no closed form exists.
    pub max_fd_residual: f64,
}

/// Maximal runs of samples with `derivative > eps`, as `(t_start, t_end)`.
pub fn positive_intervals(times: &[f64], derivative: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, (&t, &d)) in times.iter().zip(derivative).enumerate() {
        match (d > eps, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                out.push((s, times[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(s), Some(&last)) = (start, times.last()) {
        out.push((s, last));
    }
    out
}

/// Whether the last sample with `|d| > eps` has `d > eps`.
pub fn backflow_persists(derivative: &[f64], eps: f64) -> bool {
    derivative.iter().rev().find(|d| d.abs() > eps).is_some_and(|&d| d > eps)
}

/// Samples the probe-pair distance and its derivative over `grid` and flags
/// every interval where the derivative exceeds `eps`.
pub fn detect_backflow(
    dynamics: &Dynamics,
    probe: &StatePairParams,
    grid: &TimeGrid,
    eps: f64,
) -> Result<BackflowReport> {
    let times = grid.points().to_vec();
    let mut distance = Vec::with_capacity(times.len());
    let mut derivative = Vec::with_capacity(times.len());
    let mut derivative_fd = Vec::with_capacity(times.len());
    let mut max_fd_residual = 0.0f64;
    for &t in &times {
        distance.push(dynamics.distance(probe, t)?);
        let fd = dynamics.numeric_ddt(probe, t, FD_STEP)?;
        derivative_fd.push(fd);
        let d = match dynamics.analytic_ddt(probe, t) {
            Some(d) => {
                max_fd_residual = max_fd_residual.max((d - fd).abs());
                d
            }
            None => fd,
        };
        derivative.push(d);
    }
    let backflow_intervals = positive_intervals(&times, &derivative, eps);
    let max_derivative = derivative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict = !backflow_intervals.is_empty();
    let persists = backflow_persists(&derivative, eps);
    Ok(BackflowReport {
        dynamics: dynamics.label(),
        a: probe.a(),
        eps,
        times,
        distance,
        derivative,
        derivative_fd,
        backflow_intervals,
        verdict,
        persists,
        marginal: verdict && max_derivative < 10.0 * eps,
        max_derivative,
        max_fd_residual,
    })
}

fn closed_form_ddt(mode: Option<ControlMode>, a: f64, p: f64, t: f64) -> f64 {
    match mode {
        None => bare_ddt(a, t),
        Some(m) => m.ddt(a, p, t),
    }
}

/// Verdict only, from the closed-form derivative. Stops at the first sample
/// above `eps`.
pub fn backflow_verdict(mode: Option<ControlMode>, a: f64, p: f64, grid: &TimeGrid, eps: f64) -> bool {
    grid.points().iter().any(|&t| closed_form_ddt(mode, a, p, t) > eps)
}

/// [`backflow_persists`] from the closed-form derivative, scanning the grid
/// backwards.
///
/// Unlike [`backflow_verdict`] this ignores transient intervals that close
/// again, so its boundary in `a` is the large-t one.
pub fn persistent_backflow_verdict(mode: Option<ControlMode>, a: f64, p: f64, grid: &TimeGrid, eps: f64) -> bool {
    grid.points().iter().rev().map(|&t| closed_form_ddt(mode, a, p, t)).find(|d| d.abs() > eps).is_some_and(|d| d > eps)
}
