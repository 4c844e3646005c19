//! C ABI over `qbackflow`.
//!
//! Every fallible function returns a [`QbStatus`] and writes results through
//! out-pointers. Qubit density matrices cross the boundary as 8 doubles:
//! row-major entries, each as an interleaved (re, im) pair. Handles are
//! opaque; free each one exactly once with its `*_free` function.
//!
//! The most recent failure message on the calling thread is available from
//! [`qb_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qbackflow::backflow::{
    analytic_ddt_path, analytic_ddt_switch, asymptotic_threshold, bare_ddt, bare_distance, detect_backflow,
    BackflowReport, ControlMode, Dynamics, StatePairParams, TimeGrid,
};
use qbackflow::channel::{phi_t_kraus, validate_cptp, KrausChannel};
use qbackflow::control::{controlled_output_with, AmplitudeVectors, ControlConfig, Outcome, Supermap};
use qbackflow::qmat::{trace_distance, ComplexMatrix, DensityOperator, C64};
use qbackflow::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NotHermitian = 4,
    NotCptp = 5,
    PostselectionImpossible = 6,
    Unvalidated = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbMode {
    Bare = 0,
    Path = 1,
    Switch = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbOutcome {
    Plus = 0,
    Minus = 1,
}

/// A validated Kraus channel on one qubit.
pub struct QbChannel {
    inner: KrausChannel,
}

/// A coherent-control configuration.
pub struct QbControl {
    inner: ControlConfig,
}

/// Result of backflow detection on a time grid.
pub struct QbReport {
    inner: BackflowReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::DimensionMismatch { .. } => QbStatus::Dimension,
        Error::NotHermitian { .. } => QbStatus::NotHermitian,
        Error::NotCptp { .. } => QbStatus::NotCptp,
        Error::Unvalidated(_) => QbStatus::Unvalidated,
        Error::PostSelectionImpossible(_) => QbStatus::PostselectionImpossible,
        Error::InvalidState(_) | Error::InvalidParameter(_) => QbStatus::InvalidArgument,
    }
}

/// Failure inside a guarded call; converted to a status at the boundary.
enum Fail {
    Status(QbStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null() -> Fail {
    Fail::Status(QbStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail::Status(QbStatus::InvalidArgument, msg.into())
}

/// Runs `f`, mapping errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QbStatus::Ok
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            QbStatus::Panic
        }
    }
}

unsafe fn read_qubit(ptr: *const f64) -> Result<DensityOperator, Fail> {
    if ptr.is_null() {
        return Err(null());
    }
    let v = std::slice::from_raw_parts(ptr, 8);
    let entries: Vec<C64> = v.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(DensityOperator::new(ComplexMatrix::from_row_major(2, &entries)?)?)
}

unsafe fn write_qubit(rho: &DensityOperator, out: *mut f64) {
    let out = std::slice::from_raw_parts_mut(out, 8);
    for (k, z) in rho.matrix().to_row_major().iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

fn control_mode(mode: QbMode) -> Result<ControlMode, Fail> {
    match mode {
        QbMode::Path => Ok(ControlMode::Path),
        QbMode::Switch => Ok(ControlMode::Switch),
        QbMode::Bare => Err(invalid("bare mode has no control configuration")),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qb_status_message(status: QbStatus) -> *const c_char {
    let s: &'static CStr = match status {
        QbStatus::Ok => c"ok",
        QbStatus::NullPointer => c"null pointer argument",
        QbStatus::InvalidArgument => c"invalid argument",
        QbStatus::Dimension => c"dimension mismatch",
        QbStatus::NotHermitian => c"matrix is not Hermitian",
        QbStatus::NotCptp => c"channel is not CPTP",
        QbStatus::PostselectionImpossible => c"post-selection outcome has zero probability",
        QbStatus::Unvalidated => c"channel has not been validated",
        QbStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

// ---- channels ----

/// Builds the Kraus form of `φ_t`.
#[no_mangle]
pub unsafe extern "C" fn qb_channel_phi_t(t: f64, out: *mut *mut QbChannel) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let ch = Box::new(QbChannel { inner: phi_t_kraus(t)? });
        write(out, Box::into_raw(ch))
    })
}

#[no_mangle]
pub unsafe extern "C" fn qb_channel_free(channel: *mut QbChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Number of Kraus operators; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qb_channel_len(channel: *const QbChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.inner.len())
}

/// Completeness residual, smallest Choi eigenvalue and overall pass flag.
#[no_mangle]
pub unsafe extern "C" fn qb_channel_validate(
    channel: *const QbChannel,
    completeness_residual: *mut f64,
    choi_min_eigenvalue: *mut f64,
    passes: *mut bool,
) -> QbStatus {
    guard(|| {
        let report = validate_cptp(&handle(channel)?.inner);
        write(completeness_residual, report.completeness_residual)?;
        write(choi_min_eigenvalue, report.choi_min_eigenvalue)?;
        write(passes, report.passes)
    })
}

/// Applies the channel to a qubit density matrix (8 doubles in, 8 out).
#[no_mangle]
pub unsafe extern "C" fn qb_channel_apply(
    channel: *const QbChannel,
    rho_in: *const f64,
    rho_out: *mut f64,
) -> QbStatus {
    guard(|| {
        let ch = handle(channel)?;
        let rho = read_qubit(rho_in)?;
        if rho_out.is_null() {
            return Err(null());
        }
        write_qubit(&ch.inner.apply(&rho)?, rho_out);
        Ok(())
    })
}

// ---- coherent control ----

/// Control configuration with purity `p` and post-selected `outcome`.
/// Path control starts with balanced flip amplitudes.
#[no_mangle]
pub unsafe extern "C" fn qb_control_new(
    mode: QbMode,
    p: f64,
    outcome: QbOutcome,
    out: *mut *mut QbControl,
) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let outcome = match outcome {
            QbOutcome::Plus => Outcome::Plus,
            QbOutcome::Minus => Outcome::Minus,
        };
        let inner = control_mode(mode)?.config(p)?.with_outcome(outcome);
        write(out, Box::into_raw(Box::new(QbControl { inner })))
    })
}

/// Replaces the path amplitudes. `alpha` and `beta` hold interleaved
/// (re, im) pairs; `alpha` is indexed by the second channel's Kraus index,
/// `beta` by the first's. Fails on a switch configuration.
#[no_mangle]
pub unsafe extern "C" fn qb_control_set_amplitudes(
    control: *mut QbControl,
    alpha: *const f64,
    alpha_len: usize,
    beta: *const f64,
    beta_len: usize,
) -> QbStatus {
    guard(|| {
        let ctrl = control.as_mut().ok_or_else(null)?;
        if alpha.is_null() || beta.is_null() {
            return Err(null());
        }
        if !matches!(ctrl.inner.supermap, Supermap::Path(_)) {
            return Err(invalid("amplitudes apply to path control only"));
        }
        let read = |p: *const f64, n: usize| -> Vec<C64> {
            std::slice::from_raw_parts(p, 2 * n).chunks(2).map(|c| C64::new(c[0], c[1])).collect()
        };
        let amps = AmplitudeVectors::new(read(alpha, alpha_len), read(beta, beta_len))?;
        ctrl.inner.supermap = Supermap::Path(amps);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qb_control_free(control: *mut QbControl) {
    if !control.is_null() {
        drop(Box::from_raw(control));
    }
}

/// Post-selected output of the controlled pair of channel copies `e`, `f`
/// acting on `rho_in`.
#[no_mangle]
pub unsafe extern "C" fn qb_control_output(
    control: *const QbControl,
    e: *const QbChannel,
    f: *const QbChannel,
    rho_in: *const f64,
    rho_out: *mut f64,
    probability: *mut f64,
) -> QbStatus {
    guard(|| {
        let (ctrl, e, f) = (handle(control)?, handle(e)?, handle(f)?);
        let rho = read_qubit(rho_in)?;
        if rho_out.is_null() || probability.is_null() {
            return Err(null());
        }
        let out = controlled_output_with(&ctrl.inner, &e.inner, &f.inner, &rho)?;
        write_qubit(&out.state, rho_out);
        write(probability, out.probability)
    })
}

// ---- backflow ----

/// Detects backflow for the probe pair `|0⟩`, `a|0⟩ + √(1−a²)|1⟩` on a
/// logarithmic grid of `points` samples over `[t_min, t_max]`. `p` is
/// ignored in bare mode.
#[no_mangle]
pub unsafe extern "C" fn qb_detect(
    mode: QbMode,
    a: f64,
    p: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
    eps: f64,
    out: *mut *mut QbReport,
) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if eps.is_nan() || eps < 0.0 {
            return Err(invalid(format!("eps must be non-negative, got {eps}")));
        }
        let dynamics = match mode {
            QbMode::Bare => Dynamics::Bare,
            m => Dynamics::controlled(control_mode(m)?, p)?,
        };
        let grid = TimeGrid::logarithmic(t_min, t_max, points)?;
        let inner = detect_backflow(&dynamics, &StatePairParams::new(a)?, &grid, eps)?;
        write(out, Box::into_raw(Box::new(QbReport { inner })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn qb_report_free(report: *mut QbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Some derivative sample exceeds `eps`. False for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qb_report_verdict(report: *const QbReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.verdict)
}

/// Backflow still under way at the last significant derivative sample.
#[no_mangle]
pub unsafe extern "C" fn qb_report_persists(report: *const QbReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.persists)
}

/// Number of time samples; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qb_report_len(report: *const QbReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.times.len())
}

/// Copies the sample times, distances and derivatives into caller buffers
/// of `len` doubles each. `len` must equal [`qb_report_len`]; any buffer may
/// be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn qb_report_series(
    report: *const QbReport,
    len: usize,
    times: *mut f64,
    distance: *mut f64,
    derivative: *mut f64,
) -> QbStatus {
    guard(|| {
        let r = &handle(report)?.inner;
        if len != r.times.len() {
            return Err(Fail::Status(
                QbStatus::Dimension,
                format!("buffer length {len} does not match {} samples", r.times.len()),
            ));
        }
        for (src, dst) in [(&r.times, times), (&r.distance, distance), (&r.derivative, derivative)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qb_report_interval_count(report: *const QbReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.backflow_intervals.len())
}

#[no_mangle]
pub unsafe extern "C" fn qb_report_interval(
    report: *const QbReport,
    index: usize,
    t_start: *mut f64,
    t_end: *mut f64,
) -> QbStatus {
    guard(|| {
        let r = &handle(report)?.inner;
        let &(s, e) =
            r.backflow_intervals.get(index).ok_or_else(|| invalid(format!("interval {index} out of range")))?;
        write(t_start, s)?;
        write(t_end, e)
    })
}

// ---- scalars ----

/// Trace distance of two qubit density matrices.
#[no_mangle]
pub unsafe extern "C" fn qb_trace_distance(rho1: *const f64, rho2: *const f64, out: *mut f64) -> QbStatus {
    guard(|| {
        let d = trace_distance(&read_qubit(rho1)?, &read_qubit(rho2)?)?;
        write(out, d)
    })
}

/// Closed-form probe-pair distance after the bare channel.
#[no_mangle]
pub extern "C" fn qb_bare_distance(a: f64, t: f64) -> f64 {
    bare_distance(a, t)
}

/// Closed-form `dD/dt` of the probe pair. `p` is ignored in bare mode.
#[no_mangle]
pub unsafe extern "C" fn qb_ddt(mode: QbMode, a: f64, p: f64, t: f64, out: *mut f64) -> QbStatus {
    guard(|| {
        StatePairParams::new(a)?;
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("time must be finite and non-negative, got {t}")));
        }
        if mode != QbMode::Bare && !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("control purity p must lie in [0, 1], got {p}")));
        }
        let d = match mode {
            QbMode::Bare => bare_ddt(a, t),
            QbMode::Path => analytic_ddt_path(a, p, t),
            QbMode::Switch => analytic_ddt_switch(a, p, t),
        };
        write(out, d)
    })
}

/// Long-time critical `a` for path or switch control.
#[no_mangle]
pub unsafe extern "C" fn qb_threshold(mode: QbMode, p: f64, out: *mut f64) -> QbStatus {
    guard(|| {
        let v = asymptotic_threshold(control_mode(mode)?, p)?;
        write(out, v)
    })
}
