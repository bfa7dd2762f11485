//! C ABI over the lastpc pipelines.
//!
//! Conventions: every fallible call returns a `LastpcStatus`; on failure
//! the message is available from `lastpc_last_error_message` until the
//! next call on the same thread. Objects cross the boundary as opaque
//! handles that must be released with their matching `_free` function.
//! Strings returned by the library are NUL-terminated UTF-8 owned by the
//! caller and released with `lastpc_string_free`. Passing a handle after
//! freeing it, or a non-NUL-terminated string, is undefined behavior.

// safety contracts are stated in the module docs above
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lastpc::numeric::MatrixKind;
use lastpc::pipeline::{self, GriddedOptions, TabularOptions};
use lastpc::report::DiscoveryReport;
use lastpc::table::DataTable;
use lastpc::Error;

/// Status codes mirroring the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LastpcStatus {
    Ok = 0,
    /// Null pointer or invalid UTF-8 crossing the boundary.
    BadArgument = 1,
    /// Invalid input data or options.
    InputError = 2,
    /// Numerical failure.
    NumericalError = 3,
}

/// Moment matrix kind selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LastpcKind {
    Covariance = 0,
    Correlation = 1,
}

/// Opaque cases-by-variables table handle.
pub struct LastpcTable(DataTable);
/// Opaque discovery report handle.
pub struct LastpcReport(DiscoveryReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let cstring = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> LastpcStatus {
    match err.exit_code() {
        3 => LastpcStatus::NumericalError,
        _ => LastpcStatus::InputError,
    }
}

fn fail(err: Error) -> LastpcStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn bad_argument(msg: &str) -> LastpcStatus {
    set_error(msg);
    LastpcStatus::BadArgument
}

/// Message of the most recent failure on this thread, or NULL after a
/// success. The pointer is valid until the next library call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn lastpc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Build a table from row-major values. `names` holds `n_vars`
/// NUL-terminated variable names; `unit_scales` may be NULL for all-1
/// scales; `values` holds `n_cases * n_vars` entries.
#[no_mangle]
pub unsafe extern "C" fn lastpc_table_new(
    names: *const *const c_char,
    unit_scales: *const f64,
    n_vars: usize,
    values: *const f64,
    n_cases: usize,
    out: *mut *mut LastpcTable,
) -> LastpcStatus {
    clear_error();
    if names.is_null() || values.is_null() || out.is_null() || n_vars == 0 {
        return bad_argument("lastpc_table_new: null pointer or zero n_vars");
    }
    let mut owned_names = Vec::with_capacity(n_vars);
    for i in 0..n_vars {
        let ptr = *names.add(i);
        if ptr.is_null() {
            return bad_argument("lastpc_table_new: null name entry");
        }
        match CStr::from_ptr(ptr).to_str() {
            Ok(s) => owned_names.push(s.to_string()),
            Err(_) => return bad_argument("lastpc_table_new: name is not valid UTF-8"),
        }
    }
    let scales = if unit_scales.is_null() {
        vec![1.0; n_vars]
    } else {
        std::slice::from_raw_parts(unit_scales, n_vars).to_vec()
    };
    let data = std::slice::from_raw_parts(values, n_cases * n_vars).to_vec();
    match DataTable::new(owned_names, scales, data, n_cases) {
        Ok(table) => {
            *out = Box::into_raw(Box::new(LastpcTable(table)));
            LastpcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The built-in solar-system table.
#[no_mangle]
pub unsafe extern "C" fn lastpc_table_solar(out: *mut *mut LastpcTable) -> LastpcStatus {
    clear_error();
    if out.is_null() {
        return bad_argument("lastpc_table_solar: null out pointer");
    }
    *out = Box::into_raw(Box::new(LastpcTable(lastpc::datagen::solar_dataset())));
    LastpcStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn lastpc_table_free(table: *mut LastpcTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Tabular discovery. `pool_quantile <= 0` selects the default 0.25;
/// `pivot_target <= 0` selects the automatic 1..=6 search.
#[no_mangle]
pub unsafe extern "C" fn lastpc_discover_tabular(
    table: *const LastpcTable,
    log_si: bool,
    kind: LastpcKind,
    pool_quantile: f64,
    pivot_target: i32,
    out: *mut *mut LastpcReport,
) -> LastpcStatus {
    clear_error();
    if table.is_null() || out.is_null() {
        return bad_argument("lastpc_discover_tabular: null pointer");
    }
    let opts = TabularOptions {
        log_si,
        kind: match kind {
            LastpcKind::Covariance => MatrixKind::Covariance,
            LastpcKind::Correlation => MatrixKind::Correlation,
        },
        pool_quantile: if pool_quantile > 0.0 { pool_quantile } else { 0.25 },
        pivot_target: if pivot_target > 0 { Some(pivot_target as u32) } else { None },
        max_target: 6,
    };
    let meta = pipeline::meta("ffi discover tabular", "caller table", None, &[]);
    match pipeline::discover_tabular(&(*table).0, &opts, meta) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(LastpcReport(report)));
            LastpcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Gridded discovery over a stack directory on disk (the format written
/// by the CLI `gen-stack` command). `lag <= 0` disables the difference
/// filter; `pair_x`/`pair_y` may be NULL to skip the beta map.
#[no_mangle]
pub unsafe extern "C" fn lastpc_discover_gridded_dir(
    stack_dir: *const c_char,
    lag: i32,
    pair_x: *const c_char,
    pair_y: *const c_char,
    theoretical_beta: f64,
    out: *mut *mut LastpcReport,
) -> LastpcStatus {
    clear_error();
    if stack_dir.is_null() || out.is_null() {
        return bad_argument("lastpc_discover_gridded_dir: null pointer");
    }
    let dir = match CStr::from_ptr(stack_dir).to_str() {
        Ok(s) => s,
        Err(_) => return bad_argument("lastpc_discover_gridded_dir: path is not valid UTF-8"),
    };
    let pair = match (pair_x.is_null(), pair_y.is_null()) {
        (true, true) => None,
        (false, false) => {
            let x = match CStr::from_ptr(pair_x).to_str() {
                Ok(s) => s.to_string(),
                Err(_) => return bad_argument("lastpc_discover_gridded_dir: pair_x UTF-8"),
            };
            let y = match CStr::from_ptr(pair_y).to_str() {
                Ok(s) => s.to_string(),
                Err(_) => return bad_argument("lastpc_discover_gridded_dir: pair_y UTF-8"),
            };
            Some((x, y))
        }
        _ => return bad_argument("lastpc_discover_gridded_dir: give both pair fields or neither"),
    };
    let stack = match lastpc::gridded::read_stack(std::path::Path::new(dir)) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let opts = GriddedOptions {
        lag: if lag > 0 { Some(lag as usize) } else { None },
        pair,
        theoretical_beta: if theoretical_beta.is_finite() && theoretical_beta != 0.0 {
            Some(theoretical_beta)
        } else {
            None
        },
        ..GriddedOptions::new()
    };
    let meta = pipeline::meta("ffi discover gridded", dir, None, &[]);
    match pipeline::discover_gridded(&stack, &opts, meta) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(LastpcReport(report)));
            LastpcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn lastpc_report_free(report: *mut LastpcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Serialize a report to its canonical JSON text. The caller owns the
/// returned string and releases it with `lastpc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn lastpc_report_to_json(
    report: *const LastpcReport,
    out: *mut *mut c_char,
) -> LastpcStatus {
    clear_error();
    if report.is_null() || out.is_null() {
        return bad_argument("lastpc_report_to_json: null pointer");
    }
    let text = (*report).0.to_text();
    match CString::new(text) {
        Ok(cstring) => {
            *out = cstring.into_raw();
            LastpcStatus::Ok
        }
        Err(_) => bad_argument("lastpc_report_to_json: interior NUL in report"),
    }
}

/// Number of eigenvalues in the report spectrum, or 0 when absent.
#[no_mangle]
pub unsafe extern "C" fn lastpc_report_n_eigenvalues(report: *const LastpcReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (*report)
        .0
        .spectrum
        .as_ref()
        .map(|s| s.eigenvalues.len())
        .unwrap_or(0)
}

/// Copy up to `len` eigenvalues into `buf`, returning the number copied.
#[no_mangle]
pub unsafe extern "C" fn lastpc_report_eigenvalues(
    report: *const LastpcReport,
    buf: *mut f64,
    len: usize,
) -> usize {
    if report.is_null() || buf.is_null() {
        return 0;
    }
    let Some(spectrum) = (*report).0.spectrum.as_ref() else {
        return 0;
    };
    let n = spectrum.eigenvalues.len().min(len);
    std::ptr::copy_nonoverlapping(spectrum.eigenvalues.as_ptr(), buf, n);
    n
}

#[no_mangle]
pub unsafe extern "C" fn lastpc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
