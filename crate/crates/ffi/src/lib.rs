//! C ABI over `dlrbf`.
//!
//! Every function returns a [`DlrbfStatus`]; on failure the message is available
//! from [`dlrbf_last_error`] on the same thread. Handles are opaque and must be
//! released with the matching `_free` function. Strings passed in are
//! NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dlrbf::bench::config::{Config, KernelSpec};
use dlrbf::bench::csv::to_csv_string;
use dlrbf::bench::sweep::{kernel_problem, run_config, ConvergenceRecord, RecordStatus};
use dlrbf::{Error, RadialKernel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlrbfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad config, kernel parameters or arguments.
    Validation = 3,
    /// A solve failed (singular system, divergence, every N failed).
    Solver = 4,
    /// The caller's buffer is too small; the required size was written.
    BufferTooSmall = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Per-record outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlrbfRecordStatus {
    Ok = 0,
    NotConverged = 1,
    Failed = 2,
}

/// One row of a convergence run. `consistency_residual` is NaN for Newton rows.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DlrbfRecord {
    pub n: usize,
    pub max_error_u: f64,
    pub l2_error_u: f64,
    pub consistency_residual: f64,
    pub condition_estimate: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    /// 0 for DLM, 1 for Newton.
    pub solver: u32,
    pub status: DlrbfRecordStatus,
}

/// Opaque radial kernel.
pub struct DlrbfKernel {
    kernel: RadialKernel,
    label: CString,
}

/// Opaque result of a config run.
pub struct DlrbfRun {
    records: Vec<ConvergenceRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn from_error(e: &Error) -> DlrbfStatus {
    set_error(&e.to_string());
    if e.is_validation() {
        DlrbfStatus::Validation
    } else {
        DlrbfStatus::Solver
    }
}

fn guard(f: impl FnOnce() -> DlrbfStatus) -> DlrbfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside dlrbf");
            DlrbfStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, DlrbfStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(DlrbfStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        DlrbfStatus::InvalidUtf8
    })
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

fn null_error(what: &str) -> DlrbfStatus {
    set_error(&format!("null {what}"));
    DlrbfStatus::NullPointer
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dlrbf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next failing call on this thread.
#[no_mangle]
pub extern "C" fn dlrbf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a kernel from a TOML table such as `family = "multiquadric"\nc = 0.5`.
/// Operator-derived families use `R = d2/dx2` in 1D or the Laplacian in 2D,
/// chosen from `base`, with `p = q = identity`.
///
/// # Safety
/// `spec` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_kernel_from_toml(spec: *const c_char, out: *mut *mut DlrbfKernel) -> DlrbfStatus {
    guard(|| {
        if out.is_null() {
            return null_error("output pointer");
        }
        *out = ptr::null_mut();
        let text = try_status!(read_str(spec));
        let built = KernelSpec::from_toml(text).and_then(|s| kernel_problem(s.base).and_then(|p| s.build(&p)));
        match built {
            Ok(kernel) => {
                let label = CString::new(kernel.label()).unwrap_or_default();
                *out = Box::into_raw(Box::new(DlrbfKernel { kernel, label }));
                DlrbfStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Display label of the kernel, owned by the handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_kernel_label(kernel: *const DlrbfKernel) -> *const c_char {
    match kernel.as_ref() {
        Some(k) => k.label.as_ptr(),
        None => ptr::null(),
    }
}

/// Write `phi(r), phi'(r), ..., phi^(max_order)(r)` into `out[0..=max_order]`.
///
/// # Safety
/// `kernel` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_kernel_derivatives(
    kernel: *const DlrbfKernel,
    r: f64,
    max_order: usize,
    out: *mut f64,
    out_len: usize,
) -> DlrbfStatus {
    guard(|| {
        let Some(k) = kernel.as_ref() else { return null_error("kernel") };
        if out.is_null() {
            return null_error("output buffer");
        }
        if out_len < max_order + 1 {
            set_error(&format!("buffer holds {out_len} values, need {}", max_order + 1));
            return DlrbfStatus::BufferTooSmall;
        }
        match k.kernel.radial_derivatives(r, max_order) {
            Ok(d) => {
                std::slice::from_raw_parts_mut(out, d.len()).copy_from_slice(&d);
                DlrbfStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `kernel` must be null or a handle from [`dlrbf_kernel_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_kernel_free(kernel: *mut DlrbfKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Run every solver of a TOML config over its `n`/`n_list`. Per-N failures are
/// kept as records; only whole-run failures return an error.
///
/// # Safety
/// `config` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_run_config(config: *const c_char, out: *mut *mut DlrbfRun) -> DlrbfStatus {
    guard(|| {
        if out.is_null() {
            return null_error("output pointer");
        }
        *out = ptr::null_mut();
        let text = try_status!(read_str(config));
        match Config::from_toml(text).and_then(|c| run_config(&c, None)) {
            Ok(records) => {
                *out = Box::into_raw(Box::new(DlrbfRun { records }));
                DlrbfStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Number of records, 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_run_len(run: *const DlrbfRun) -> usize {
    run.as_ref().map_or(0, |r| r.records.len())
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_run_record(run: *const DlrbfRun, index: usize, out: *mut DlrbfRecord) -> DlrbfStatus {
    guard(|| {
        let Some(run) = run.as_ref() else { return null_error("run") };
        let Some(out) = out.as_mut() else { return null_error("output record") };
        let Some(r) = run.records.get(index) else {
            set_error(&format!("record {index} of {}", run.records.len()));
            return DlrbfStatus::OutOfRange;
        };
        *out = DlrbfRecord {
            n: r.n,
            max_error_u: r.max_error_u,
            l2_error_u: r.l2_error_u,
            consistency_residual: r.consistency_residual.unwrap_or(f64::NAN),
            condition_estimate: r.condition_estimate,
            iterations: r.iterations,
            wall_time_ms: r.wall_time_ms,
            solver: u32::from(r.solver != "dlm"),
            status: match r.status {
                RecordStatus::Ok => DlrbfRecordStatus::Ok,
                RecordStatus::NotConverged => DlrbfRecordStatus::NotConverged,
                RecordStatus::Failed(_) => DlrbfRecordStatus::Failed,
            },
        };
        DlrbfStatus::Ok
    })
}

/// Write the run as CSV (NUL-terminated) into `buf`. `needed` receives the size
/// including the terminator; call with `buf = NULL, len = 0` to query it.
///
/// # Safety
/// `run` must be a live handle, `buf` must hold `len` bytes or be null with
/// `len == 0`, and `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_run_csv(
    run: *const DlrbfRun,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DlrbfStatus {
    guard(|| {
        let Some(run) = run.as_ref() else { return null_error("run") };
        let text = match to_csv_string(&run.records) {
            Ok(t) => t,
            Err(e) => return from_error(&e),
        };
        let size = text.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = size;
        }
        if buf.is_null() || len < size {
            set_error(&format!("CSV needs {size} bytes, buffer has {len}"));
            return DlrbfStatus::BufferTooSmall;
        }
        let dst = std::slice::from_raw_parts_mut(buf.cast::<u8>(), size);
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        DlrbfStatus::Ok
    })
}

/// # Safety
/// `run` must be null or a handle from [`dlrbf_run_config`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dlrbf_run_free(run: *mut DlrbfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
