//! C ABI over `confhyp`.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with their `_free` functions. Every fallible call returns a
//! [`ConfhypStatus`]; on failure [`confhyp_last_error`] describes what went
//! wrong. Strings returned through out-pointers are released with
//! [`confhyp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use confhyp::conformal::{enumerate_form_candidates, Invariant};
use confhyp::report::{write_report, ResidualReport};
use confhyp::scalar::CoefficientMode;
use confhyp::scenario::{generate_random, parse_scenario, ScenarioSpec};
use confhyp::suite::{self, SuiteOptions};
use confhyp::{with_mode, Error};

/// Status codes; the first four match the command line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfhypStatus {
    Ok = 0,
    /// A report was produced but some check in it failed.
    CheckFailed = 1,
    /// Malformed input: scenario syntax, invalid field or argument.
    InvalidInput = 2,
    /// The computation itself failed (order underflow, excluded formula, ...).
    Computation = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
    /// The requested report key does not exist or is not numeric.
    NotFound = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfhypMode {
    /// Use the mode recorded in the scenario.
    Scenario = 0,
    Float = 1,
    Exact = 2,
}

/// Opaque scenario handle.
pub struct ConfhypScenario {
    spec: ScenarioSpec,
}

/// Opaque report handle.
pub struct ConfhypReport {
    report: ResidualReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> ConfhypStatus {
    match e {
        Error::Syntax { .. } | Error::InvalidField { .. } | Error::InvalidArgument(_) => ConfhypStatus::InvalidInput,
        _ => ConfhypStatus::Computation,
    }
}

/// Runs `f` with panics and errors turned into status codes.
fn guard(f: impl FnOnce() -> Result<ConfhypStatus, (ConfhypStatus, String)>) -> ConfhypStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside confhyp");
            ConfhypStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (ConfhypStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (ConfhypStatus, String) {
    (ConfhypStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, (ConfhypStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ConfhypStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (ConfhypStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| (ConfhypStatus::InvalidInput, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn mode_for(spec: &ScenarioSpec, mode: ConfhypMode) -> CoefficientMode {
    match mode {
        ConfhypMode::Scenario => spec.mode,
        ConfhypMode::Float => CoefficientMode::Float,
        ConfhypMode::Exact => CoefficientMode::Exact,
    }
}

unsafe fn emit_report(
    out: *mut *mut ConfhypReport,
    result: confhyp::Result<ResidualReport>,
) -> Result<ConfhypStatus, (ConfhypStatus, String)> {
    let report = result.map_err(lib_err)?;
    let status = if report.passed() {
        ConfhypStatus::Ok
    } else {
        set_error(format!("failed checks: {}", report.failures.join(",")));
        ConfhypStatus::CheckFailed
    };
    *out = Box::into_raw(Box::new(ConfhypReport { report }));
    Ok(status)
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn confhyp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn confhyp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses scenario text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_scenario_parse(text: *const c_char, out: *mut *mut ConfhypScenario) -> ConfhypStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = parse_scenario(read_str(text)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ConfhypScenario { spec }));
        Ok(ConfhypStatus::Ok)
    })
}

/// Seeded random scenario of dimension `d` and jet order `order`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_scenario_generate(
    d: usize,
    order: usize,
    seed: u64,
    exact: bool,
    out: *mut *mut ConfhypScenario,
) -> ConfhypStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let mode = if exact { CoefficientMode::Exact } else { CoefficientMode::Float };
        let spec = generate_random(d, order, seed, mode).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ConfhypScenario { spec }));
        Ok(ConfhypStatus::Ok)
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn confhyp_scenario_free(s: *mut ConfhypScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension of the scenario, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn confhyp_scenario_dimension(s: *const ConfhypScenario) -> usize {
    s.as_ref().map_or(0, |s| s.spec.dimension)
}

/// Serializes the scenario in the text format accepted by
/// [`confhyp_scenario_parse`].
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_scenario_to_text(s: *const ConfhypScenario, out: *mut *mut c_char) -> ConfhypStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        write_string(out, s.spec.to_text())?;
        Ok(ConfhypStatus::Ok)
    })
}

fn options(spec: &ScenarioSpec, trials: usize, seed: u64, max_order: i32) -> SuiteOptions {
    SuiteOptions {
        trials: if trials == 0 { 8 } else { trials },
        seed: if seed == 0 { spec.seed } else { seed },
        max_order: usize::try_from(max_order).ok(),
    }
}

/// Base-point values of the extrinsic invariants and curvature stack.
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_summary(
    s: *const ConfhypScenario,
    mode: ConfhypMode,
    out: *mut *mut ConfhypReport,
) -> ConfhypStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let spec = &s.spec;
        emit_report(out, with_mode!(mode_for(spec, mode), S => suite::summary::<S>(spec)))
    })
}

/// Identity, weight-law and reduce-to suites. `trials == 0` means the
/// default of 8 and `seed == 0` the scenario seed. Returns
/// `CheckFailed` with a report when some check fails.
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_verify(
    s: *const ConfhypScenario,
    mode: ConfhypMode,
    trials: usize,
    seed: u64,
    out: *mut *mut ConfhypReport,
) -> ConfhypStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let spec = &s.spec;
        let opts = options(spec, trials, seed, -1);
        emit_report(out, with_mode!(mode_for(spec, mode), S => suite::verify::<S>(spec, &opts)))
    })
}

/// Transverse-order probe of one invariant (`n`, `II`, `H`, `IIo`, `III`,
/// `IV`). A negative `max_order` probes up to the adapted jet order.
///
/// # Safety
/// `s` must be a live handle, `invariant` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_probe(
    s: *const ConfhypScenario,
    invariant: *const c_char,
    mode: ConfhypMode,
    max_order: i32,
    trials: usize,
    seed: u64,
    out: *mut *mut ConfhypReport,
) -> ConfhypStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let inv: Invariant = read_str(invariant)?.parse().map_err(lib_err)?;
        let spec = &s.spec;
        let opts = options(spec, trials, seed, max_order);
        emit_report(out, with_mode!(mode_for(spec, mode), S => suite::probe::<S>(spec, &[inv], &opts)))
    })
}

/// Asymptotic-unit defining-function improver.
///
/// # Safety
/// `s` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_improve(
    s: *const ConfhypScenario,
    mode: ConfhypMode,
    out: *mut *mut ConfhypReport,
) -> ConfhypStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let spec = &s.spec;
        emit_report(out, with_mode!(mode_for(spec, mode), S => suite::improve::<S>(spec)))
    })
}

/// Number of leading-order candidate terms for the `m`-th conformal
/// fundamental form, or -1 when `m < 3`.
#[no_mangle]
pub extern "C" fn confhyp_enumerate_count(m: u32) -> i32 {
    if m < 3 {
        set_error("candidate enumeration needs m >= 3");
        return -1;
    }
    enumerate_form_candidates(m, 8).solutions.len() as i32
}

/// # Safety
/// `r` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn confhyp_report_free(r: *mut ConfhypReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Whether every check in the report passed; false for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn confhyp_report_passed(r: *const ConfhypReport) -> bool {
    r.as_ref().is_some_and(|r| r.report.passed())
}

/// The report in its text format, without timestamp fields.
///
/// # Safety
/// `r` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_report_text(r: *const ConfhypReport, out: *mut *mut c_char) -> ConfhypStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let mut report = r.report.clone();
        report.timestamp = None;
        report.elapsed_ms = None;
        write_string(out, write_report(&report))?;
        Ok(ConfhypStatus::Ok)
    })
}

/// Numeric entry `key` of the report as a double.
///
/// # Safety
/// `r` must be a live handle, `key` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn confhyp_report_value(r: *const ConfhypReport, key: *const c_char, out: *mut f64) -> ConfhypStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let key = read_str(key)?;
        let v = r
            .report
            .get(key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| (ConfhypStatus::NotFound, format!("no numeric entry `{key}`")))?;
        *out = v;
        Ok(ConfhypStatus::Ok)
    })
}
