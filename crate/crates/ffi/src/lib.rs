//! C ABI over the gridnum engine.
//!
//! One call evaluates an expression; the outcome is an opaque handle whose
//! accessors return borrowed NUL-terminated strings. Every string stays
//! valid until [`gn_outcome_free`] releases the handle. All functions are
//! null-tolerant: accessors on a null handle return null (or a negative
//! status), and [`gn_eval`] rejects null or non-UTF-8 input with
//! [`GnStatus::InvalidArgument`] without touching `out`.

use std::ffi::{c_char, CStr, CString};

use gridnum::expr::{run, Invocation, TraceFormat};

/// Status of one evaluation, mirroring the CLI exit contract.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnStatus {
    /// Evaluation succeeded; the result line is available.
    Ok = 0,
    /// The expression (or base) did not parse; see the diagnostic.
    ParseError = 1,
    /// The expression parsed but could not be computed (say, a zero
    /// divisor); see the diagnostic.
    MathError = 2,
    /// Null pointer, non-UTF-8 text, or an out-of-range mode argument.
    InvalidArgument = 3,
}

/// Trace selector for [`gn_eval`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnTrace {
    /// Result only.
    None = 0,
    /// Human-readable move narration and final grid before the result.
    Text = 1,
    /// One JSON event object per line before the result.
    Json = 2,
}

/// Rounding mode for chain-step decimals.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnRounding {
    /// Drop fractional digits toward zero.
    Truncate = 0,
    /// Round halves away from zero.
    HalfUp = 1,
}

/// Opaque evaluation outcome; create with [`gn_eval`], release with
/// [`gn_outcome_free`].
pub struct GnOutcome {
    status: GnStatus,
    output: CString,
    diagnostic: CString,
    result: CString,
}

fn c_string(text: &str) -> CString {
    // The engine never emits NUL bytes; replace defensively rather than
    // fail the whole call if that ever changes.
    CString::new(text).unwrap_or_else(|_| {
        CString::new(text.replace('\0', "?")).expect("NUL-free after replacement")
    })
}

/// Evaluates one expression, such as `"55 + 150"` or
/// `"chain(425, 23; 13, 10)@2"`.
///
/// `base` selects the numeral base (2..=36, 10 for ordinary decimal);
/// `precision` is the fractional digit count for chain-step decimals.
/// On `Ok`, `ParseError`, or `MathError` a new outcome is written to
/// `out`; the caller owns it and must release it with
/// [`gn_outcome_free`]. On `InvalidArgument` nothing is written.
///
/// # Safety
/// `expression` must be null or a valid NUL-terminated string; `out` must
/// be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn gn_eval(
    expression: *const c_char,
    base: u32,
    trace: GnTrace,
    precision: u32,
    rounding: GnRounding,
    out: *mut *mut GnOutcome,
) -> GnStatus {
    if expression.is_null() || out.is_null() {
        return GnStatus::InvalidArgument;
    }
    let Ok(expression) = unsafe { CStr::from_ptr(expression) }.to_str() else {
        return GnStatus::InvalidArgument;
    };
    let inv = Invocation {
        expression: Some(expression.to_string()),
        base,
        trace: match trace {
            GnTrace::None => None,
            GnTrace::Text => Some(TraceFormat::Text),
            GnTrace::Json => Some(TraceFormat::Json),
        },
        precision,
        rounding: match rounding {
            GnRounding::Truncate => gridnum::chain::Rounding::Truncate,
            GnRounding::HalfUp => gridnum::chain::Rounding::HalfUp,
        },
        seed: None,
        csv: false,
    };
    let outcome = run(&inv);
    let status = match outcome.exit {
        0 => GnStatus::Ok,
        1 => GnStatus::ParseError,
        _ => GnStatus::MathError,
    };
    let result_line = outcome.stdout.lines().last().unwrap_or("");
    let handle = Box::new(GnOutcome {
        status,
        output: c_string(&outcome.stdout),
        diagnostic: c_string(outcome.stderr.trim_end()),
        result: c_string(result_line),
    });
    unsafe { out.write(Box::into_raw(handle)) };
    status
}

/// Status the outcome was produced with, or a negative value on null.
///
/// # Safety
/// `outcome` must be null or a live pointer from [`gn_eval`].
#[no_mangle]
pub unsafe extern "C" fn gn_outcome_status(outcome: *const GnOutcome) -> i32 {
    match unsafe { outcome.as_ref() } {
        Some(o) => o.status as i32,
        None => -1,
    }
}

/// Full standard output: the optional trace followed by the result line.
/// Borrowed; valid until the outcome is freed. Null on a null handle.
///
/// # Safety
/// `outcome` must be null or a live pointer from [`gn_eval`].
#[no_mangle]
pub unsafe extern "C" fn gn_outcome_output(outcome: *const GnOutcome) -> *const c_char {
    match unsafe { outcome.as_ref() } {
        Some(o) => o.output.as_ptr(),
        None => std::ptr::null(),
    }
}

/// The bare result line: a numeral, or `q=<q> r=<r>` for a division with
/// a non-zero remainder. Empty on failed evaluations. Borrowed; null on a
/// null handle.
///
/// # Safety
/// `outcome` must be null or a live pointer from [`gn_eval`].
#[no_mangle]
pub unsafe extern "C" fn gn_outcome_result(outcome: *const GnOutcome) -> *const c_char {
    match unsafe { outcome.as_ref() } {
        Some(o) => o.result.as_ptr(),
        None => std::ptr::null(),
    }
}

/// One-line diagnostic for failed evaluations, empty on success.
/// Borrowed; null on a null handle.
///
/// # Safety
/// `outcome` must be null or a live pointer from [`gn_eval`].
#[no_mangle]
pub unsafe extern "C" fn gn_outcome_diagnostic(outcome: *const GnOutcome) -> *const c_char {
    match unsafe { outcome.as_ref() } {
        Some(o) => o.diagnostic.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Releases an outcome. Null is a no-op. Each outcome must be freed
/// exactly once; its strings die with it.
///
/// # Safety
/// `outcome` must be null or a pointer obtained from [`gn_eval`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gn_outcome_free(outcome: *mut GnOutcome) {
    if !outcome.is_null() {
        drop(unsafe { Box::from_raw(outcome) });
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gn_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
