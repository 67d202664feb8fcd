use std::ffi::{CStr, CString};
use std::ptr;

use dfdrift::event_model::{write_csv, write_xes, EventLog};
use dfdrift::synthlab::{alternating_segments, base_model, generate_drift_log, standard_pattern};
use dfdrift_ffi::*;

fn drift_log() -> EventLog {
    let base = base_model();
    let changed = standard_pattern("serial_insert").unwrap().apply(&base).unwrap();
    generate_drift_log(&alternating_segments(&base, &changed, "insert", 2), 300, 1).unwrap().0
}

unsafe fn points(log: *const DfdLog, window: usize) -> Vec<DfdDriftPoint> {
    let config = dfd_config_default(window);
    let mut report = ptr::null_mut();
    assert_eq!(dfd_detect(log, &config, &mut report), DfdStatus::Ok);
    let out = (0..dfd_report_num_points(report))
        .map(|i| {
            let mut p = DfdDriftPoint {
                event_index: 0,
                trace_index: 0,
                direction: DfdDirection::Forward,
                timestamp_ms: 0,
                has_timestamp: false,
                merged: false,
            };
            assert_eq!(dfd_report_point(report, i, &mut p), DfdStatus::Ok);
            p
        })
        .collect();
    assert!(dfd_report_mean_ms_per_event(report) >= 0.0);
    dfd_report_free(report);
    out
}

#[test]
fn files_in_both_formats_give_the_same_points() {
    let log = drift_log();
    let dir = tempfile::tempdir().unwrap();
    let xes = dir.path().join("log.xes");
    let csv = dir.path().join("log.csv");
    write_xes(&log, std::fs::File::create(&xes).unwrap()).unwrap();
    write_csv(&log, std::fs::File::create(&csv).unwrap()).unwrap();

    let mut found = Vec::new();
    for path in [xes, csv] {
        let c_path = CString::new(path.to_str().unwrap()).unwrap();
        unsafe {
            let mut handle = ptr::null_mut();
            assert_eq!(dfd_log_from_file(c_path.as_ptr(), &mut handle), DfdStatus::Ok);
            assert_eq!(dfd_log_num_traces(handle), 600);
            found.push(points(handle, 150));
            dfd_log_free(handle);
        }
    }
    assert_eq!(found[0], found[1]);
    assert_eq!(found[0].len(), 1);
    let p = found[0][0];
    assert!((290..=310).contains(&p.trace_index), "{}", p.trace_index);
    assert!(p.has_timestamp);
}

#[test]
fn invalid_config_is_rejected() {
    unsafe {
        let mut log = ptr::null_mut();
        let bytes = {
            let mut b = Vec::new();
            write_xes(&drift_log(), &mut b).unwrap();
            b
        };
        assert_eq!(dfd_log_from_xes(bytes.as_ptr(), bytes.len(), &mut log), DfdStatus::Ok);
        let mut config = dfd_config_default(150);
        config.p_threshold = 1.5;
        let mut report = ptr::null_mut();
        assert_eq!(dfd_detect(log, &config, &mut report), DfdStatus::InvalidArgument);
        assert!(report.is_null());
        let msg = CStr::from_ptr(dfd_last_error()).to_string_lossy().into_owned();
        assert!(msg.contains("p threshold"), "{msg}");
        dfd_log_free(log);
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        dfd_log_new(ptr::null_mut());
        assert!(!dfd_last_error().is_null());
        std::thread::spawn(|| assert!(dfd_last_error().is_null())).join().unwrap();
        assert!(!dfd_last_error().is_null());
    }
}
