//! The `qbackflow` command line: state evolution, distance series, backflow
//! detection, thresholds, region scans and self-validation.
//!
//! Exit codes: 0 success (and "no backflow" for `detect`), 1 I/O failure,
//! 2 usage error, 3 post-selection impossible, 4 validation failure,
//! 5 backflow detected by `detect`.

mod output;
mod validate;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::backflow::{
    asymptotic_threshold, detect_backflow, scan_region, ControlMode, Dynamics, StatePairParams, TimeGrid, DEFAULT_EPS,
    DEFAULT_TIME_POINTS, DEFAULT_T_MAX, DEFAULT_T_MIN, MAX_SCAN_CELLS,
};
use crate::channel::phi_t_kraus;
use crate::control::{controlled_output, Outcome};
use crate::error::Error;
use crate::qmat::{ComplexMatrix, DensityOperator, C64};

pub use output::{fmt_f64, round_json};
pub use validate::{run_suites, CheckResult, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_POSTSELECTION: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_BACKFLOW: i32 = 5;

/// Environment variable holding the worker-thread count for scans.
pub const THREADS_ENV: &str = "QBACKFLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qbackflow", version, about = "Information backflow under coherently controlled lossy qubit channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time series of the evolved state and post-selection probability.
    Evolve(EvolveArgs),
    /// Trace distance of the probe pair over a time grid.
    Distance(DistanceArgs),
    /// Distance, derivative and backflow verdict for the probe pair.
    Detect(DetectArgs),
    /// Long-time critical `a` for a control mode.
    Threshold(ThresholdArgs),
    /// Backflow verdicts of both control modes over an (a, p) grid.
    Scan(ScanArgs),
    /// Run the built-in consistency checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bare,
    Path,
    Switch,
}

impl ModeArg {
    fn control(self) -> Option<ControlMode> {
        match self {
            ModeArg::Bare => None,
            ModeArg::Path => Some(ControlMode::Path),
            ModeArg::Switch => Some(ControlMode::Switch),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Bare => "bare",
            ModeArg::Path => "path",
            ModeArg::Switch => "switch",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ControlModeArg {
    Path,
    Switch,
}

impl From<ControlModeArg> for ControlMode {
    fn from(m: ControlModeArg) -> Self {
        match m {
            ControlModeArg::Path => ControlMode::Path,
            ControlModeArg::Switch => ControlMode::Switch,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutcomeArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Control purity p in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Evolve |ψ⟩ = a|0⟩ + √(1−a²)|1⟩.
    #[arg(long, conflicts_with = "input")]
    pub a: Option<f64>,
    /// Initial state, row-major: 4 real entries or 8 interleaved re,im values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub input: Option<Vec<f64>>,
    /// Single evaluation time.
    #[arg(long, conflicts_with = "t_max")]
    pub t: Option<f64>,
    /// End of a linear time series starting at 0.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of samples in the series.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "plus")]
    pub outcome: OutcomeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = DEFAULT_T_MIN)]
    pub t_min: f64,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_TIME_POINTS)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: Spacing,
}

impl GridArgs {
    fn grid(&self) -> Result<TimeGrid, Error> {
        match self.spacing {
            Spacing::Log => TimeGrid::logarithmic(self.t_min, self.t_max, self.points),
            Spacing::Linear => TimeGrid::linear(self.t_min, self.t_max, self.points),
        }
    }
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Positivity threshold on dD/dt.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub mode: ControlModeArg,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.01)]
    pub a_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_max: f64,
    #[arg(long, default_value_t = 100)]
    pub a_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 101)]
    pub p_steps: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Evaluation time for the ODE suite; defaults to {0.5, 1, 2, 5}.
    #[arg(long)]
    pub t: Option<f64>,
    /// Test hook: scale the identity Kraus operator of φ_t by (1 + value).
    #[arg(long, hide = true)]
    pub inject_perturbation: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a CLI command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    PostSelection(String),
    Validation(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::PostSelection(_) => EXIT_POSTSELECTION,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::PostSelection(m) => write!(f, "{m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::PostSelectionImpossible(_) => CliError::PostSelection(e.to_string()),
            Error::NotCptp { .. } | Error::Unvalidated(_) => CliError::Validation(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Runs a parsed command. `stdout` receives the primary output when no
/// `--out` is given; `stderr` receives human-readable summaries.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Evolve(args) => cmd_evolve(args, stdout),
        Command::Distance(args) => cmd_distance(args, stdout),
        Command::Detect(args) => cmd_detect(args, stdout, stderr),
        Command::Threshold(args) => cmd_threshold(args, stdout),
        Command::Scan(args) => cmd_scan(args, stdout),
        Command::Validate(args) => cmd_validate(args, stdout, stderr),
    }
}

fn initial_state(args: &EvolveArgs) -> Result<DensityOperator, CliError> {
    if let Some(values) = &args.input {
        let entries: Vec<C64> = match values.len() {
            4 => values.iter().map(|&x| C64::new(x, 0.0)).collect(),
            8 => values.chunks(2).map(|c| C64::new(c[0], c[1])).collect(),
            n => return Err(CliError::Usage(format!("--input needs 4 or 8 values, got {n}"))),
        };
        return Ok(DensityOperator::new(ComplexMatrix::from_row_major(2, &entries)?)?);
    }
    if let Some(a) = args.a {
        return Ok(StatePairParams::new(a)?.pair().1);
    }
    Ok(DensityOperator::basis(2, 0))
}

fn evolve_times(args: &EvolveArgs) -> Result<Vec<f64>, CliError> {
    match (args.t, args.t_max) {
        (Some(t), _) => Ok(vec![t]),
        (None, Some(t_max)) => {
            if args.points < 2 || t_max.is_nan() || t_max <= 0.0 {
                return Err(CliError::Usage("--t-max must be positive and --points at least 2".into()));
            }
            let step = t_max / (args.points - 1) as f64;
            Ok((0..args.points).map(|k| step * k as f64).collect())
        }
        (None, None) => Err(CliError::Usage("evolve needs --t or --t-max".into())),
    }
}

fn cmd_evolve(args: &EvolveArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let rho0 = initial_state(args)?;
    let times = evolve_times(args)?;
    let outcome = match args.outcome {
        OutcomeArg::Plus => Outcome::Plus,
        OutcomeArg::Minus => Outcome::Minus,
    };
    let config = match args.mode.control() {
        Some(mode) => Some(mode.config(args.p)?.with_outcome(outcome)),
        None => None,
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let (state, prob) = match &config {
            None => (phi_t_kraus(t)?.apply(&rho0)?, 1.0),
            Some(cfg) => {
                let out = controlled_output(cfg, &rho0, t)?;
                (out.state, out.probability)
            }
        };
        rows.push((t, state.into_matrix().to_row_major(), prob));
    }

    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record([
                "t",
                "rho00_re",
                "rho00_im",
                "rho01_re",
                "rho01_im",
                "rho10_re",
                "rho10_im",
                "rho11_re",
                "rho11_im",
                "probability",
            ])?;
            for (t, entries, prob) in &rows {
                let mut rec = vec![fmt_f64(*t)];
                for z in entries {
                    rec.push(fmt_f64(z.re));
                    rec.push(fmt_f64(z.im));
                }
                rec.push(fmt_f64(*prob));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(t, entries, prob)| {
                    json!({
                        "t": t,
                        "rho": entries.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                        "probability": prob,
                    })
                })
                .collect();
            let doc = json!({
                "command": "evolve",
                "mode": args.mode.name(),
                "p": args.p,
                "outcome": outcome,
                "rows": rows,
            });
            output::write_json(&mut sink, &doc)?;
        }
    }
    Ok(EXIT_OK)
}

fn dynamics_for(mode: ModeArg, p: f64) -> Result<Dynamics, CliError> {
    Ok(match mode.control() {
        None => Dynamics::Bare,
        Some(m) => Dynamics::controlled(m, p)?,
    })
}

fn cmd_distance(args: &DistanceArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let probe = StatePairParams::new(args.a)?;
    let dynamics = dynamics_for(args.mode, args.p)?;
    let grid = args.grid.grid()?;
    let distance: Vec<f64> = grid.points().iter().map(|&t| dynamics.distance(&probe, t)).collect::<Result<_, _>>()?;

    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(["t", "distance"])?;
            for (t, d) in grid.points().iter().zip(&distance) {
                w.write_record([fmt_f64(*t), fmt_f64(*d)])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "command": "distance",
                "mode": args.mode.name(),
                "a": args.a,
                "p": args.p,
                "times": grid.points(),
                "distance": distance,
            });
            output::write_json(&mut sink, &doc)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_detect(args: &DetectArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let probe = StatePairParams::new(args.a)?;
    let dynamics = dynamics_for(args.mode, args.p)?;
    let report = detect_backflow(&dynamics, &probe, &args.grid.grid()?, args.eps)?;

    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(["t", "distance", "ddt", "ddt_fd", "backflow"])?;
            for i in 0..report.times.len() {
                w.write_record([
                    fmt_f64(report.times[i]),
                    fmt_f64(report.distance[i]),
                    fmt_f64(report.derivative[i]),
                    fmt_f64(report.derivative_fd[i]),
                    u8::from(report.derivative[i] > report.eps).to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut doc = serde_json::to_value(&report).map_err(std::io::Error::other)?;
            doc["command"] = json!("detect");
            doc["mode"] = json!(args.mode.name());
            doc["p"] = json!(args.p);
            output::write_json(&mut sink, &doc)?;
        }
    }
    let intervals: Vec<String> =
        report.backflow_intervals.iter().map(|(s, e)| format!("[{}, {}]", fmt_f64(*s), fmt_f64(*e))).collect();
    writeln!(
        stderr,
        "mode={} a={} p={} backflow={} persists={} marginal={} max_ddt={} intervals={}",
        args.mode.name(),
        fmt_f64(args.a),
        fmt_f64(args.p),
        report.verdict,
        report.persists,
        report.marginal,
        fmt_f64(report.max_derivative),
        if intervals.is_empty() { "none".to_string() } else { intervals.join(" ") }
    )?;
    Ok(if report.verdict { EXIT_BACKFLOW } else { EXIT_OK })
}

fn cmd_threshold(args: &ThresholdArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mode = ControlMode::from(args.mode);
    let value = asymptotic_threshold(mode, args.p)?;
    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format {
        None => writeln!(sink, "{}", fmt_f64(value))?,
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(["mode", "p", "threshold"])?;
            w.write_record([format!("{mode:?}").to_lowercase(), fmt_f64(args.p), fmt_f64(value)])?;
            w.flush()?;
        }
        Some(Format::Json) => {
            output::write_json(
                &mut sink,
                &json!({ "command": "threshold", "mode": mode, "p": args.p, "threshold": value }),
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn cmd_scan(args: &ScanArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cells = args.a_steps.saturating_mul(args.p_steps);
    if cells > MAX_SCAN_CELLS {
        return Err(CliError::Usage(format!("scan of {cells} cells exceeds the limit of {MAX_SCAN_CELLS}")));
    }
    let a_grid = linspace(args.a_min, args.a_max, args.a_steps);
    let p_grid = linspace(args.p_min, args.p_max, args.p_steps);
    let scan = scan_region(&a_grid, &p_grid, &args.grid.grid()?, args.eps)?;

    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(["a", "p", "path", "switch"])?;
            for c in scan.cells() {
                w.write_record([fmt_f64(c.a), fmt_f64(c.p), c.path.to_string(), c.switch.to_string()])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let cells: Vec<_> = scan.cells().collect();
            let doc = json!({
                "command": "scan",
                "a_grid": scan.a_grid,
                "p_grid": scan.p_grid,
                "cells": cells,
                "switch_within_path": scan.switch_within_path(),
            });
            output::write_json(&mut sink, &doc)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let results = run_suites(args.suite, args.t, args.inject_perturbation)?;
    let mut sink = output::Sink::open(&args.output.out, stdout)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(["suite", "check", "passed", "value", "tolerance"])?;
            for r in &results {
                w.write_record([
                    r.suite.clone(),
                    r.check.clone(),
                    r.passed.to_string(),
                    fmt_f64(r.value),
                    fmt_f64(r.tolerance),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({ "command": "validate", "checks": results });
            output::write_json(&mut sink, &doc)?;
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(stderr, "{} checks, {} failed", results.len(), failed)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VALIDATION })
}
