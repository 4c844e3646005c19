use rayon::prelude::*;
use serde::Serialize;

use super::{backflow_verdict, persistent_backflow_verdict, ControlMode, TimeGrid};
use crate::error::{Error, Result};

/// Largest number of `(a, p)` cells a single scan may evaluate.
pub const MAX_SCAN_CELLS: usize = 1_000_000;

/// Critical `a` below which the long-time derivative turns positive:
/// `√(p/(1+p))` for path control, `√(2p²/(3p+2))` for the switch.
pub fn asymptotic_threshold(mode: ControlMode, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("control purity p must lie in [0, 1], got {p}")));
    }
    Ok(match mode {
        ControlMode::Path => (p / (1.0 + p)).sqrt(),
        ControlMode::Switch => (2.0 * p * p / (3.0 * p + 2.0)).sqrt(),
    })
}

/// Backflow verdicts over an `(a, p)` grid. Rows are indexed by `p`, columns
/// by `a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionScan {
    pub a_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub backflow_path: Vec<Vec<bool>>,
    pub backflow_switch: Vec<Vec<bool>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanCell {
    pub a: f64,
    pub p: f64,
    pub path: bool,
    pub switch: bool,
}

impl RegionScan {
    /// Cells in `p`-major order, then `a`.
    pub fn cells(&self) -> impl Iterator<Item = ScanCell> + '_ {
        self.p_grid.iter().enumerate().flat_map(move |(i, &p)| {
            self.a_grid.iter().enumerate().map(move |(j, &a)| ScanCell {
                a,
                p,
                path: self.backflow_path[i][j],
                switch: self.backflow_switch[i][j],
            })
        })
    }

    /// Every switch-backflow cell is also a path-backflow cell.
    pub fn switch_within_path(&self) -> bool {
        self.cells().all(|c| !c.switch || c.path)
    }
}

fn check_grid(name: &str, grid: &[f64], ok: impl Fn(f64) -> bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|&&v| !ok(v)) {
        return Err(Error::InvalidParameter(format!("{name} grid value {bad} out of range")));
    }
    Ok(())
}

/// Evaluates both control modes on every `(a, p)` cell. Cells are computed in
/// parallel and merged by index.
pub fn scan_region(a_grid: &[f64], p_grid: &[f64], times: &TimeGrid, eps: f64) -> Result<RegionScan> {
    check_grid("a", a_grid, |a| a > 0.0 && a <= 1.0)?;
    check_grid("p", p_grid, |p| (0.0..=1.0).contains(&p))?;
    let cells = a_grid.len().saturating_mul(p_grid.len());
    if cells > MAX_SCAN_CELLS {
        return Err(Error::InvalidParameter(format!("scan of {cells} cells exceeds the limit of {MAX_SCAN_CELLS}")));
    }
    let na = a_grid.len();
    let verdicts: Vec<(bool, bool)> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let (a, p) = (a_grid[k % na], p_grid[k / na]);
            (
                backflow_verdict(Some(ControlMode::Path), a, p, times, eps),
                backflow_verdict(Some(ControlMode::Switch), a, p, times, eps),
            )
        })
        .collect();
    let rows = |pick: fn(&(bool, bool)) -> bool| -> Vec<Vec<bool>> {
        verdicts.chunks(na).map(|row| row.iter().map(pick).collect()).collect()
    };
    Ok(RegionScan {
        a_grid: a_grid.to_vec(),
        p_grid: p_grid.to_vec(),
        backflow_path: rows(|v| v.0),
        backflow_switch: rows(|v| v.1),
    })
}

/// Which verdict decides region membership for [`empirical_boundary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCriterion {
    /// Any derivative sample above `eps`, as in [`scan_region`].
    Window,
    /// Backflow still under way at late times; its edge is the asymptotic
    /// threshold.
    Persistent,
}

/// Upper edge of the backflow region in `a` at fixed `p`: the midpoint
/// between the largest `a` showing backflow and the next grid value.
///
/// `a_grid` must be ascending. Returns `None` when no such transition lies
/// inside the grid.
pub fn empirical_boundary(
    mode: ControlMode,
    p: f64,
    a_grid: &[f64],
    times: &TimeGrid,
    eps: f64,
    criterion: BoundaryCriterion,
) -> Option<f64> {
    let verdict = match criterion {
        BoundaryCriterion::Window => backflow_verdict,
        BoundaryCriterion::Persistent => persistent_backflow_verdict,
    };
    let verdicts: Vec<bool> = a_grid.par_iter().map(|&a| verdict(Some(mode), a, p, times, eps)).collect();
    let last_true = verdicts.iter().rposition(|&v| v)?;
    let next = a_grid.get(last_true + 1)?;
    Some(0.5 * (a_grid[last_true] + next))
}
