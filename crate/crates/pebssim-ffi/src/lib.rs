//! C ABI for the pebssim toolkit: run simulations from a TOML config, open
//! and inspect dump files through an opaque handle, write analysis reports,
//! and evaluate the overhead model.
//!
//! Conventions: every fallible call returns a [`PebssimStatus`]; results
//! travel through out-pointers; `pebssim_last_error` describes the most
//! recent failure on the calling thread. Strings cross the boundary as
//! NUL-terminated UTF-8; strings returned by this library must be released
//! with `pebssim_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use pebssim::analyze::overhead_estimate;
use pebssim::report::{write_manifest, write_reports, ReportOptions};
use pebssim::sampler::SamplerConfig;
use pebssim::trace::{read_dump, TraceDump};

/// Result of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PebssimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Configuration rejected by validation.
    InvalidConfig = 3,
    /// File could not be read or written.
    Io = 4,
    /// Dump file failed parsing or validation.
    BadDump = 5,
    /// Simulation pipeline failed.
    SimFailed = 6,
    /// Index argument out of range.
    OutOfRange = 7,
    /// A panic was caught at the boundary (library bug).
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> PebssimStatus) -> PebssimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at FFI boundary");
            PebssimStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PebssimStatus> {
    if ptr.is_null() {
        set_error(format!("{what} must not be null"));
        return Err(PebssimStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        PebssimStatus::InvalidUtf8
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dump".into())
}

/// Message describing the calling thread's most recent failure, or null if
/// none occurred. Free with `pebssim_string_free`.
#[no_mangle]
pub extern "C" fn pebssim_last_error() -> *mut c_char {
    LAST_ERROR
        .with(|slot| slot.borrow().as_ref().map(|c| c.clone().into_raw()))
        .unwrap_or(std::ptr::null_mut())
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by a pebssim function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pebssim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static library version string; do not free.
#[no_mangle]
pub extern "C" fn pebssim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque handle to a loaded trace dump.
pub struct PebssimDump {
    dump: TraceDump,
}

/// Run a simulation described by a TOML document (the same schema as the CLI
/// `--config` file) and write the dump to `dump_path`.
///
/// # Safety
/// `config_toml` and `dump_path` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pebssim_simulate_toml(
    config_toml: *const c_char,
    dump_path: *const c_char,
) -> PebssimStatus {
    guard(|| {
        let config = match required_str(config_toml, "config_toml") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let path = match required_str(dump_path, "dump_path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let sim = match pebssim::cli::sim_config_from_toml(config) {
            Ok(sim) => sim,
            Err(e) => {
                set_error(format!("{e:#}"));
                return PebssimStatus::InvalidConfig;
            }
        };
        let (dump, _) = match pebssim::sim::simulate(&sim) {
            Ok(out) => out,
            Err(e) => {
                set_error(e.to_string());
                return PebssimStatus::SimFailed;
            }
        };
        match pebssim::trace::write_dump(&dump, &path) {
            Ok(()) => PebssimStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                PebssimStatus::Io
            }
        }
    })
}

/// Open and validate a dump file, returning a handle through `out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_open(
    path: *const c_char,
    out: *mut *mut PebssimDump,
) -> PebssimStatus {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return PebssimStatus::NullArgument;
        }
        let path = match required_str(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        match read_dump(&path) {
            Ok(dump) => {
                *out = Box::into_raw(Box::new(PebssimDump { dump }));
                PebssimStatus::Ok
            }
            Err(e @ pebssim::trace::DumpError::Io(_)) => {
                set_error(e.to_string());
                PebssimStatus::Io
            }
            Err(e) => {
                set_error(e.to_string());
                PebssimStatus::BadDump
            }
        }
    })
}

/// Release a dump handle. Null is a no-op.
///
/// # Safety
/// `dump` must have come from `pebssim_dump_open` and not yet been closed.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_close(dump: *mut PebssimDump) {
    if !dump.is_null() {
        drop(Box::from_raw(dump));
    }
}

/// Shared body of the scalar getters below.
unsafe fn dump_scalar(
    dump: *const PebssimDump,
    out: *mut u64,
    get: impl FnOnce(&TraceDump) -> u64,
) -> PebssimStatus {
    guard(|| {
        if dump.is_null() || out.is_null() {
            set_error("dump and out must not be null");
            return PebssimStatus::NullArgument;
        }
        *out = get(&(*dump).dump);
        PebssimStatus::Ok
    })
}

/// Number of per-thread sections in the dump.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_thread_count(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.threads.len() as u64)
}

/// Total harvested records across all threads.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_total_records(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.total_records())
}

/// Total harvest batches across all threads.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_total_batches(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.total_batches())
}

/// Number of mapping events recorded in the dump.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_mapping_count(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.mappings.len() as u64)
}

/// Reset value the run was configured with.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_reset(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.reset)
}

/// Records per threshold interrupt the run was configured with.
///
/// # Safety
/// `dump` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_threshold_records(
    dump: *const PebssimDump,
    out: *mut u64,
) -> PebssimStatus {
    dump_scalar(dump, out, |d| d.threshold_records)
}

/// Per-thread accessors: id and records dropped by the harvest ring for the
/// thread at `index` (0-based, in dump order).
///
/// # Safety
/// `dump` must be a live handle; `out_id` and `out_dropped` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_thread_info(
    dump: *const PebssimDump,
    index: u64,
    out_id: *mut u64,
    out_dropped: *mut u64,
) -> PebssimStatus {
    guard(|| {
        if dump.is_null() || out_id.is_null() || out_dropped.is_null() {
            set_error("dump, out_id, and out_dropped must not be null");
            return PebssimStatus::NullArgument;
        }
        let handle = &*dump;
        let Some(thread) = handle.dump.threads.get(index as usize) else {
            set_error(format!(
                "thread index {index} out of range ({} threads)",
                handle.dump.threads.len()
            ));
            return PebssimStatus::OutOfRange;
        };
        *out_id = thread.thread_id;
        *out_dropped = thread.dropped;
        PebssimStatus::Ok
    })
}

/// Analyze an open dump: write the CSV/SVG artifact set, summary, and
/// manifest into `out_dir` using default thresholds, with file names derived
/// from `stem`.
///
/// # Safety
/// `dump` must be a live handle; `stem` and `out_dir` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pebssim_dump_analyze(
    dump: *const PebssimDump,
    stem: *const c_char,
    out_dir: *const c_char,
) -> PebssimStatus {
    guard(|| {
        if dump.is_null() {
            set_error("dump must not be null");
            return PebssimStatus::NullArgument;
        }
        let stem = match required_str(stem, "stem") {
            Ok(s) if !s.is_empty() => s.to_owned(),
            Ok(_) => file_stem(Path::new("dump")),
            Err(status) => return status,
        };
        let dir = match required_str(out_dir, "out_dir") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        if let Err(e) = std::fs::create_dir_all(&dir) {
            set_error(format!("cannot create {}: {e}", dir.display()));
            return PebssimStatus::Io;
        }
        let handle = &*dump;
        let options = ReportOptions::default();
        let bundle = match write_reports(&handle.dump, &stem, &dir, &options) {
            Ok(bundle) => bundle,
            Err(e) => {
                set_error(e.to_string());
                return PebssimStatus::Io;
            }
        };
        let config = serde_json_config(&options);
        match write_manifest(&dir, &stem, config, &bundle.files) {
            Ok(_) => PebssimStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                PebssimStatus::Io
            }
        }
    })
}

fn serde_json_config(options: &ReportOptions) -> serde_json::Value {
    serde_json::json!({ "analysis": options })
}

/// Estimated fraction of CPU time spent in the sampling interrupt handler.
/// Pure function of the arguments; returns a negative value on invalid input
/// (zero `reset`/`threshold_records` or non-positive `cpu_hz`).
#[no_mangle]
pub extern "C" fn pebssim_overhead_estimate(
    reset: u64,
    threshold_records: u64,
    handler_cycles: u64,
    miss_rate: f64,
    cpu_hz: f64,
) -> f64 {
    // NaN inputs fall through the comparisons and are rejected explicitly.
    if reset == 0 || threshold_records == 0 || cpu_hz <= 0.0 || miss_rate < 0.0 {
        return -1.0;
    }
    if cpu_hz.is_nan() || miss_rate.is_nan() {
        return -1.0;
    }
    let mut config = SamplerConfig::new(reset, u64::MAX);
    config.threshold_records = threshold_records;
    config.handler_cycles = handler_cycles;
    overhead_estimate(&config, miss_rate, cpu_hz)
}
