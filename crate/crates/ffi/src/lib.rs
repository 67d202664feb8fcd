//! C ABI for the dfdrift detector.
//!
//! Logs and reports are opaque handles created and destroyed by this
//! library. Every fallible function returns a [`DfdStatus`]; on failure the
//! message is available from [`dfd_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dfdrift::detector::{detect, write_report_json, DetectorConfig, Direction, DriftReport};
use dfdrift::event_model::{parse_csv, parse_xes, ColumnMapping, Event, EventLog, Ordering, Timestamp, Trace};
use dfdrift::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Parse = 3,
    StreamTooShort = 4,
    Io = 5,
    OutOfRange = 6,
    Internal = 7,
}

/// How traces are flattened into a stream.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdOrdering {
    TraceMajor = 0,
    Timestamp = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfdDirection {
    Forward = 0,
    Backward = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfdConfig {
    pub window_size: usize,
    /// 0 selects `window_size / 2`.
    pub consecutive_tests: usize,
    pub p_threshold: f64,
    pub asr_threshold: f64,
    pub ordering: DfdOrdering,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfdDriftPoint {
    pub event_index: usize,
    pub trace_index: usize,
    pub direction: DfdDirection,
    /// Milliseconds since the Unix epoch; meaningful when `has_timestamp`.
    pub timestamp_ms: i64,
    pub has_timestamp: bool,
    /// True when a point of the other direction was merged into this one.
    pub merged: bool,
}

/// An event log under construction or parsed from a file.
pub struct DfdLog {
    log: EventLog,
    index: HashMap<String, usize>,
}

/// The outcome of one detection run.
pub struct DfdReport {
    report: DriftReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> DfdStatus {
    match e {
        Error::Xes { .. }
        | Error::MissingActivity { .. }
        | Error::MissingTraceId { .. }
        | Error::DuplicateTrace(_)
        | Error::MissingColumn(_)
        | Error::CsvRow { .. }
        | Error::Csv(_)
        | Error::MissingTimestamp { .. }
        | Error::Json(_) => DfdStatus::Parse,
        Error::StreamTooShort { .. } => DfdStatus::StreamTooShort,
        Error::Config(_) => DfdStatus::InvalidArgument,
        Error::Io(_) => DfdStatus::Io,
        _ => DfdStatus::Internal,
    }
}

fn fail(status: DfdStatus, message: impl Into<String>) -> DfdStatus {
    set_error(message);
    status
}

fn fail_core(e: Error) -> DfdStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, converting a panic into [`DfdStatus::Internal`].
fn guarded(f: impl FnOnce() -> DfdStatus) -> DfdStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(DfdStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, DfdStatus> {
    if s.is_null() {
        return Err(fail(DfdStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(DfdStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

/// # Safety
/// `data` must be null or point to `len` readable bytes.
unsafe fn bytes_arg<'a>(data: *const u8, len: usize) -> Result<&'a [u8], DfdStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(DfdStatus::NullArgument, "data is null"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn into_log_handle(log: EventLog, out: *mut *mut DfdLog) -> DfdStatus {
    let index = log
        .traces
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.clone(), i))
        .collect();
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(DfdLog { log, index })) };
    DfdStatus::Ok
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dfd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dfd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration for `window_size`: `window_size / 2` consecutive
/// tests, p < 0.05, residual > 1.96, trace-major ordering.
#[no_mangle]
pub extern "C" fn dfd_config_default(window_size: usize) -> DfdConfig {
    let c = DetectorConfig::new(window_size);
    DfdConfig {
        window_size,
        consecutive_tests: c.consecutive_tests,
        p_threshold: c.p_threshold,
        asr_threshold: c.asr_threshold,
        ordering: DfdOrdering::TraceMajor,
    }
}

/// Creates an empty log.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_new(out: *mut *mut DfdLog) -> DfdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DfdStatus::NullArgument, "out is null");
        }
        into_log_handle(EventLog::default(), out)
    })
}

/// Appends an event to the trace `trace_id`, creating the trace at the end
/// of the log if it does not exist yet.
///
/// # Safety
/// `log` must be a live handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_push_event(
    log: *mut DfdLog,
    trace_id: *const c_char,
    activity: *const c_char,
    timestamp_ms: i64,
    has_timestamp: bool,
) -> DfdStatus {
    guarded(|| {
        let Some(handle) = log.as_mut() else {
            return fail(DfdStatus::NullArgument, "log is null");
        };
        let (id, activity) = match (str_arg(trace_id, "trace_id"), str_arg(activity, "activity")) {
            (Ok(id), Ok(a)) => (id, a),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if activity.is_empty() {
            return fail(DfdStatus::InvalidArgument, "activity is empty");
        }
        let event = if has_timestamp {
            Event::at(activity, Timestamp(timestamp_ms))
        } else {
            Event::new(activity)
        };
        let next = handle.log.traces.len();
        let i = *handle.index.entry(id.to_owned()).or_insert(next);
        if i == next {
            handle.log.traces.push(Trace::new(id, Vec::new()));
        }
        handle.log.traces[i].events.push(event);
        DfdStatus::Ok
    })
}

/// Parses an XES document held in memory.
///
/// # Safety
/// `data` must point to `len` bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_from_xes(data: *const u8, len: usize, out: *mut *mut DfdLog) -> DfdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DfdStatus::NullArgument, "out is null");
        }
        let bytes = match bytes_arg(data, len) {
            Ok(b) => b,
            Err(s) => return s,
        };
        match parse_xes(bytes).and_then(|l| l.validate().map(|_| l)) {
            Ok(log) => into_log_handle(log, out),
            Err(e) => fail_core(e),
        }
    })
}

/// Parses a CSV document held in memory. A null column name selects the
/// default (`case_id`, `activity`, `timestamp`).
///
/// # Safety
/// `data` must point to `len` bytes; column names must be null or
/// NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_from_csv(
    data: *const u8,
    len: usize,
    case_column: *const c_char,
    activity_column: *const c_char,
    timestamp_column: *const c_char,
    out: *mut *mut DfdLog,
) -> DfdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DfdStatus::NullArgument, "out is null");
        }
        let bytes = match bytes_arg(data, len) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let mut mapping = ColumnMapping::default();
        for (ptr, slot) in [(case_column, &mut mapping.trace_id), (activity_column, &mut mapping.activity)] {
            if !ptr.is_null() {
                match str_arg(ptr, "column") {
                    Ok(s) => *slot = s.to_owned(),
                    Err(s) => return s,
                }
            }
        }
        if !timestamp_column.is_null() {
            match str_arg(timestamp_column, "timestamp_column") {
                Ok(s) => mapping.timestamp = Some(s.to_owned()),
                Err(s) => return s,
            }
        }
        match parse_csv(bytes, &mapping).and_then(|l| l.validate().map(|_| l)) {
            Ok(log) => into_log_handle(log, out),
            Err(e) => fail_core(e),
        }
    })
}

/// Reads and parses a log file; `.csv` files are read as CSV with default
/// columns, anything else as XES.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_from_file(path: *const c_char, out: *mut *mut DfdLog) -> DfdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DfdStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => return fail(DfdStatus::Io, format!("cannot read {path}: {e}")),
        };
        let parsed = if path.to_ascii_lowercase().ends_with(".csv") {
            parse_csv(&bytes, &ColumnMapping::default())
        } else {
            parse_xes(&bytes)
        };
        match parsed.and_then(|l| l.validate().map(|_| l)) {
            Ok(log) => into_log_handle(log, out),
            Err(e) => fail_core(e),
        }
    })
}

/// Number of traces; 0 for a null handle.
///
/// # Safety
/// `log` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_num_traces(log: *const DfdLog) -> usize {
    log.as_ref().map_or(0, |h| h.log.num_traces())
}

/// Number of events; 0 for a null handle.
///
/// # Safety
/// `log` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_num_events(log: *const DfdLog) -> usize {
    log.as_ref().map_or(0, |h| h.log.num_events())
}

/// # Safety
/// `log` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dfd_log_free(log: *mut DfdLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Runs forward and backward detection and merges the results.
///
/// # Safety
/// `log` must be a live handle, `config` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dfd_detect(
    log: *const DfdLog,
    config: *const DfdConfig,
    out: *mut *mut DfdReport,
) -> DfdStatus {
    guarded(|| {
        let (Some(handle), Some(config)) = (log.as_ref(), config.as_ref()) else {
            return fail(DfdStatus::NullArgument, "log or config is null");
        };
        if out.is_null() {
            return fail(DfdStatus::NullArgument, "out is null");
        }
        let mut c = DetectorConfig::new(config.window_size)
            .with_p_threshold(config.p_threshold)
            .with_asr_threshold(config.asr_threshold)
            .with_ordering(match config.ordering {
                DfdOrdering::TraceMajor => Ordering::TraceMajor,
                DfdOrdering::Timestamp => Ordering::Timestamp,
            });
        if config.consecutive_tests > 0 {
            c = c.with_consecutive_tests(config.consecutive_tests);
        }
        match detect(&handle.log, &c) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(DfdReport { report }));
                DfdStatus::Ok
            }
            Err(e) => fail_core(e),
        }
    })
}

/// Number of merged drift points; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_num_points(report: *const DfdReport) -> usize {
    report.as_ref().map_or(0, |h| h.report.points.len())
}

/// Copies merged drift point `index` into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_point(
    report: *const DfdReport,
    index: usize,
    out: *mut DfdDriftPoint,
) -> DfdStatus {
    guarded(|| {
        let (Some(handle), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(DfdStatus::NullArgument, "report or out is null");
        };
        let Some(p) = handle.report.points.get(index) else {
            return fail(
                DfdStatus::OutOfRange,
                format!("point {index} of {}", handle.report.points.len()),
            );
        };
        *out = DfdDriftPoint {
            event_index: p.event_index,
            trace_index: p.trace_index,
            direction: match p.direction {
                Direction::Forward => DfdDirection::Forward,
                Direction::Backward => DfdDirection::Backward,
            },
            timestamp_ms: p.timestamp.map_or(0, |t| t.0),
            has_timestamp: p.timestamp.is_some(),
            merged: p.merged_with.is_some(),
        };
        DfdStatus::Ok
    })
}

/// Mean wall-clock milliseconds per event of the run; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_mean_ms_per_event(report: *const DfdReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |h| h.report.stats.mean_ms_per_event)
}

/// The full report as JSON. Release the string with [`dfd_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_to_json(report: *const DfdReport, out: *mut *mut c_char) -> DfdStatus {
    guarded(|| {
        let (Some(handle), false) = (report.as_ref(), out.is_null()) else {
            return fail(DfdStatus::NullArgument, "report or out is null");
        };
        let mut buf = Vec::new();
        if let Err(e) = write_report_json(&handle.report, &mut buf) {
            return fail_core(e);
        }
        match CString::new(buf) {
            Ok(s) => {
                *out = s.into_raw();
                DfdStatus::Ok
            }
            Err(e) => fail(DfdStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dfd_report_free(report: *mut DfdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn dfd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
