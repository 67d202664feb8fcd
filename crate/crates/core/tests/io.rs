use dfdrift::event_model::{
    parse_csv, parse_xes, split_log, to_event_stream, write_csv, write_xes, ColumnMapping, EventLog, Ordering,
};
use dfdrift::synthlab::{alternating_segments, base_model, generate_drift_log, inject_noise, standard_pattern};

fn drifted_log() -> EventLog {
    let base = base_model();
    let changed = standard_pattern("swap_fragments").unwrap().apply(&base).unwrap();
    generate_drift_log(&alternating_segments(&base, &changed, "swap", 4), 50, 9)
        .unwrap()
        .0
}

#[test]
fn xes_and_csv_round_trip_generated_logs() {
    let log = inject_noise(&drifted_log(), 0.1, 0.1, 4).unwrap();
    let mut xes = Vec::new();
    write_xes(&log, &mut xes).unwrap();
    assert_eq!(parse_xes(&xes).unwrap(), log);
    let mut csv = Vec::new();
    write_csv(&log, &mut csv).unwrap();
    assert_eq!(parse_csv(&csv, &ColumnMapping::default()).unwrap(), log);
}

#[test]
fn orderings_agree_on_generated_logs() {
    // generated traces never overlap in time, so both orderings coincide
    let log = drifted_log();
    let by_trace = to_event_stream(&log, Ordering::TraceMajor).unwrap();
    let by_time = to_event_stream(&log, Ordering::Timestamp).unwrap();
    assert_eq!(by_trace.events(), by_time.events());
    assert_eq!(by_trace.len(), log.num_events());
    assert_eq!(by_trace.to_log(), log);
}

#[test]
fn reversing_twice_is_identity() {
    let stream = to_event_stream(&drifted_log(), Ordering::TraceMajor).unwrap();
    let back = stream.reversed().reversed();
    assert_eq!(back.events(), stream.events());
    let rev = stream.reversed();
    for i in [0, 17, stream.len() - 1] {
        assert_eq!(rev.forward_index(i), stream.len() - 1 - i);
    }
}

#[test]
fn split_partitions_traces() {
    let log = drifted_log();
    let (a, b) = split_log(&log, Ordering::TraceMajor, log.num_events() / 2).unwrap();
    assert_eq!(a.num_traces() + b.num_traces(), log.num_traces());
    assert_eq!(a.num_events() + b.num_events(), log.num_events());
    assert_eq!(a.traces[..], log.traces[..a.num_traces()]);
}

#[test]
fn rejects_malformed_inputs() {
    assert!(parse_xes(b"<log><trace><event><string key=\"concept:name\" value=\"A\"/></event>").is_err());
    assert!(parse_csv(b"case_id,activity\n1,A\n", &ColumnMapping::default()).is_ok());
    assert!(parse_csv(b"case,activity\n1,A\n", &ColumnMapping::default()).is_err());
}
