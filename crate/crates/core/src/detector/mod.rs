//! Drift detection over an event stream.
//!
//! The forward scan keeps a reference window of `window_size` events and
//! peeks the event right after it. When that event forms a directly-follows
//! relation absent from the window's novelty set, it becomes a candidate and
//! a battery of `2 · consecutive_tests` window-pair tests centred on it is
//! run. The candidate is confirmed only if every test rejects independence
//! (G-test p-value below threshold) and shows the new relation significantly
//! over-represented in the detection window (residual above threshold).
//!
//! Removed behaviour is found by running the same scan over the reversed
//! stream, where a removal looks like an addition. The two result lists are
//! then merged.

mod merge;
mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dfr_window::{DfRelation, SlidingRelations, WindowState};
use crate::error::{Error, Result};
use crate::event_model::{to_event_stream, EventLog, EventStream, Ordering, Timestamp};
use crate::stats::{TestCache, TestKey, DEFAULT_ASR_THRESHOLD, DEFAULT_P_THRESHOLD};

pub use self::merge::merge_reports;
pub use self::report::{write_report_csv, write_report_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub window_size: usize,
    pub consecutive_tests: usize,
    pub p_threshold: f64,
    pub asr_threshold: f64,
    pub ordering: Ordering,
}

impl DetectorConfig {
    /// Defaults: `window_size / 2` consecutive tests, p < 0.05,
    /// residual > 1.96.
    pub fn new(window_size: usize) -> Self {
        DetectorConfig {
            window_size,
            consecutive_tests: (window_size / 2).max(1),
            p_threshold: DEFAULT_P_THRESHOLD,
            asr_threshold: DEFAULT_ASR_THRESHOLD,
            ordering: Ordering::TraceMajor,
        }
    }

    pub fn with_consecutive_tests(mut self, tests: usize) -> Self {
        self.consecutive_tests = tests;
        self
    }

    pub fn with_p_threshold(mut self, p: f64) -> Self {
        self.p_threshold = p;
        self
    }

    pub fn with_asr_threshold(mut self, asr: f64) -> Self {
        self.asr_threshold = asr;
        self
    }

    pub fn with_ordering(mut self, ordering: Ordering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size < 2 {
            return Err(Error::Config(format!(
                "window size must be at least 2, got {}",
                self.window_size
            )));
        }
        if self.consecutive_tests < 1 || self.consecutive_tests > self.window_size {
            return Err(Error::Config(format!(
                "consecutive tests must lie in 1..={}, got {}",
                self.window_size, self.consecutive_tests
            )));
        }
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(Error::Config(format!(
                "p threshold must lie in (0, 1), got {}",
                self.p_threshold
            )));
        }
        if !self.asr_threshold.is_finite() {
            return Err(Error::Config("residual threshold must be finite".into()));
        }
        Ok(())
    }

    /// Shortest stream the scan accepts.
    pub fn min_stream_len(&self) -> usize {
        2 * self.window_size + self.consecutive_tests + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLabels {
    pub source: String,
    pub target: String,
}

impl RelationLabels {
    fn of(stream: &EventStream, r: DfRelation) -> Self {
        RelationLabels {
            source: stream.activity_label(r.source).to_owned(),
            target: stream.activity_label(r.target).to_owned(),
        }
    }

    fn inverted(self) -> Self {
        RelationLabels {
            source: self.target,
            target: self.source,
        }
    }
}

impl std::fmt::Display for RelationLabels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}>{}", self.source, self.target)
    }
}

/// The other-direction point absorbed into a merged point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedPartner {
    pub direction: Direction,
    pub event_index: usize,
    pub trace_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    /// Index of the reporting event; forward coordinates except in the raw
    /// output of [`detect_forward`] run on a reversed stream.
    pub event_index: usize,
    pub trace_index: usize,
    pub trace_id: String,
    pub timestamp: Option<Timestamp>,
    pub direction: Direction,
    pub trigger_relation: RelationLabels,
    #[serde(rename = "p_values")]
    pub battery_p_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_with: Option<MergedPartner>,
}

/// Outcome of the consecutive-test battery for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub confirmed: bool,
    /// p-values of the tests run, in order. The battery stops at the first
    /// failing test, so this is shorter than `2 · consecutive_tests` for
    /// rejected candidates.
    pub p_values: Vec<f64>,
    /// Some test window would fall outside the stream.
    pub out_of_bounds: bool,
}

/// Counters of one directional scan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStats {
    pub candidates: usize,
    pub tests_computed: usize,
    pub out_of_bounds_candidates: usize,
    pub peak_cache_entries: usize,
    pub peak_window_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub events: usize,
    pub traces: usize,
    pub forward: ScanStats,
    pub backward: ScanStats,
    pub elapsed_seconds: f64,
    pub mean_ms_per_event: f64,
    pub events_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub config: DetectorConfig,
    pub points: Vec<DriftPoint>,
    pub forward: Vec<DriftPoint>,
    pub backward: Vec<DriftPoint>,
    pub stats: RunStats,
}

impl DriftReport {
    /// Trace indexes of the merged points, ascending.
    pub fn trace_indexes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.points.iter().map(|p| p.trace_index).collect();
        v.sort_unstable();
        v
    }
}

/// Runs the consecutive-test battery for a relation `r` peeked at
/// `ref_start + window_size`.
pub fn validate_candidate(
    stream: &EventStream,
    ref_start: usize,
    r: DfRelation,
    config: &DetectorConfig,
    cache: &mut TestCache,
    direction: Direction,
) -> Result<Validation> {
    let w = config.window_size;
    let c = config.consecutive_tests;
    let rejected = |p_values| Validation {
        confirmed: false,
        p_values,
        out_of_bounds: true,
    };
    if ref_start < c {
        return Ok(rejected(Vec::new()));
    }
    let first = ref_start - c;
    // last detection window ends at first + 2c - 1 + 2w
    if first + 2 * c + 2 * w - 1 > stream.len() {
        return Ok(rejected(Vec::new()));
    }

    let mut reference = SlidingRelations::new(stream, first, w)?;
    let mut detection = SlidingRelations::new(stream, first + w, w)?;
    let mut p_values = Vec::with_capacity(2 * c);
    for i in 0..2 * c {
        if i > 0 {
            reference.advance(stream)?;
            detection.advance(stream)?;
        }
        let key = TestKey {
            direction,
            ref_start: first + i,
        };
        let outcome = cache.cached_test(key, reference.counts(), detection.counts())?;
        p_values.push(outcome.p_value);
        let passed = outcome.is_testable()
            && outcome.p_value < config.p_threshold
            && outcome.asr(&r) > config.asr_threshold;
        if !passed {
            return Ok(Validation {
                confirmed: false,
                p_values,
                out_of_bounds: false,
            });
        }
    }
    Ok(Validation {
        confirmed: true,
        p_values,
        out_of_bounds: false,
    })
}

fn check_stream(stream: &EventStream, config: &DetectorConfig) -> Result<()> {
    config.validate()?;
    let min = config.min_stream_len();
    if stream.len() < min {
        return Err(Error::StreamTooShort {
            len: stream.len(),
            min,
        });
    }
    Ok(())
}

/// One directional scan. Reported indexes are indexes of `stream` itself and
/// relations are in `stream`'s orientation.
fn scan(
    stream: &EventStream,
    config: &DetectorConfig,
    cache: &mut TestCache,
    direction: Direction,
) -> Result<(Vec<DriftPoint>, ScanStats)> {
    check_stream(stream, config)?;
    let n = stream.len();
    let w = config.window_size;
    let c = config.consecutive_tests;
    let computed_before = cache.computations();
    let mut stats = ScanStats::default();
    let mut points = Vec::new();
    let mut window = WindowState::new(stream, 0, w)?;
    let mut ref_start = 0;

    while ref_start + 2 * w + c < n {
        let peek = ref_start + w;
        let e = &stream.events()[peek];
        if let Some(r) = window.peek_new_relation(stream, e) {
            if window.is_novel(&r) {
                stats.candidates += 1;
                let v = validate_candidate(stream, ref_start, r, config, cache, direction)?;
                stats.peak_cache_entries = stats.peak_cache_entries.max(cache.len());
                if v.confirmed {
                    points.push(DriftPoint {
                        event_index: peek,
                        trace_index: e.trace as usize,
                        trace_id: stream.trace_id(e.trace).to_owned(),
                        timestamp: e.timestamp,
                        direction,
                        trigger_relation: RelationLabels::of(stream, r),
                        battery_p_values: v.p_values,
                        merged_with: None,
                    });
                    ref_start = peek;
                    window = WindowState::new(stream, ref_start, w)?;
                    cache.evict_before(direction, ref_start.saturating_sub(c));
                    continue;
                }
                if v.out_of_bounds {
                    stats.out_of_bounds_candidates += 1;
                }
                window.exclude_relation(r);
            }
        }
        window.advance(stream)?;
        ref_start += 1;
        stats.peak_window_entries = stats.peak_window_entries.max(window.footprint());
        if ref_start % w == 0 {
            cache.evict_before(direction, ref_start.saturating_sub(c));
        }
    }
    stats.tests_computed = cache.computations() - computed_before;
    Ok((points, stats))
}

/// Forward scan over `stream` as given.
pub fn detect_forward(
    stream: &EventStream,
    config: &DetectorConfig,
    cache: &mut TestCache,
) -> Result<Vec<DriftPoint>> {
    scan(stream, config, cache, Direction::Forward).map(|(points, _)| points)
}

fn to_forward_coordinates(n: usize, points: Vec<DriftPoint>) -> Vec<DriftPoint> {
    points
        .into_iter()
        .rev()
        .map(|p| DriftPoint {
            event_index: n - 1 - p.event_index,
            trigger_relation: p.trigger_relation.inverted(),
            ..p
        })
        .collect()
}

fn scan_backward(
    stream: &EventStream,
    config: &DetectorConfig,
    cache: &mut TestCache,
) -> Result<(Vec<DriftPoint>, ScanStats)> {
    let reversed = stream.reversed();
    let (points, stats) = scan(&reversed, config, cache, Direction::Backward)?;
    Ok((to_forward_coordinates(stream.len(), points), stats))
}

/// Scan of the reversed stream, reported in forward coordinates and forward
/// relation orientation, sorted by event index.
pub fn detect_backward(
    stream: &EventStream,
    config: &DetectorConfig,
    cache: &mut TestCache,
) -> Result<Vec<DriftPoint>> {
    scan_backward(stream, config, cache).map(|(points, _)| points)
}

/// Both scans (run concurrently, each with its own cache), merged.
pub fn detect_stream(stream: &EventStream, config: &DetectorConfig) -> Result<DriftReport> {
    check_stream(stream, config)?;
    let started = Instant::now();
    let (forward, backward) = std::thread::scope(|s| {
        let backward = s.spawn(|| scan_backward(stream, config, &mut TestCache::new()));
        let forward = scan(stream, config, &mut TestCache::new(), Direction::Forward);
        (forward, backward.join().expect("backward scan panicked"))
    });
    let (forward, forward_stats) = forward?;
    let (backward, backward_stats) = backward?;
    let points = merge_reports(&forward, &backward, config.window_size);
    let elapsed = started.elapsed().as_secs_f64();
    let n = stream.len();
    Ok(DriftReport {
        config: config.clone(),
        points,
        forward,
        backward,
        stats: RunStats {
            events: n,
            traces: stream.num_traces(),
            forward: forward_stats,
            backward: backward_stats,
            elapsed_seconds: elapsed,
            mean_ms_per_event: elapsed * 1e3 / n as f64,
            events_per_second: if elapsed > 0.0 { n as f64 / elapsed } else { f64::INFINITY },
        },
    })
}

pub fn detect(log: &EventLog, config: &DetectorConfig) -> Result<DriftReport> {
    config.validate()?;
    let stream = to_event_stream(log, config.ordering)?;
    detect_stream(&stream, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::Trace;

    fn log_of(shapes: &[(&[&str], usize)]) -> EventLog {
        let mut traces = Vec::new();
        for (shape, count) in shapes {
            for _ in 0..*count {
                let id = format!("t{}", traces.len());
                traces.push(Trace::from_activities(id, shape));
            }
        }
        EventLog::new(traces)
    }

    #[test]
    fn config_defaults() {
        let c = DetectorConfig::new(250);
        assert_eq!(c.consecutive_tests, 125);
        assert_eq!(c.p_threshold, 0.05);
        assert_eq!(c.asr_threshold, 1.96);
        assert_eq!(c.ordering, Ordering::TraceMajor);
        assert!(c.validate().is_ok());
        assert_eq!(DetectorConfig::new(3).consecutive_tests, 1);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(DetectorConfig::new(1).validate().is_err());
        assert!(DetectorConfig::new(0).validate().is_err());
        assert!(DetectorConfig::new(10).with_consecutive_tests(0).validate().is_err());
        assert!(DetectorConfig::new(10).with_consecutive_tests(11).validate().is_err());
        assert!(DetectorConfig::new(10).with_p_threshold(0.0).validate().is_err());
        assert!(DetectorConfig::new(10).with_asr_threshold(f64::NAN).validate().is_err());
    }

    #[test]
    fn too_short_stream_names_minimum() {
        let log = log_of(&[(&["A", "B"], 10)]);
        let err = detect(&log, &DetectorConfig::new(10)).unwrap_err();
        assert!(matches!(err, Error::StreamTooShort { len: 20, min: 26 }));
        assert!(err.to_string().contains("26"));
    }

    #[test]
    fn constant_behaviour_reports_nothing_and_tests_nothing() {
        let log = log_of(&[(&["A", "B", "C", "D"], 200)]);
        let report = detect(&log, &DetectorConfig::new(100)).unwrap();
        assert!(report.points.is_empty());
        assert_eq!(report.stats.forward.candidates, 0);
        assert_eq!(report.stats.forward.tests_computed, 0);
        assert_eq!(report.stats.backward.tests_computed, 0);
    }

    #[test]
    fn candidate_too_close_to_start_is_out_of_bounds() {
        let log = log_of(&[(&["A", "B", "C", "D"], 50)]);
        let stream = to_event_stream(&log, Ordering::TraceMajor).unwrap();
        let config = DetectorConfig::new(20);
        let r = DfRelation::new(
            stream.activity_id("A").unwrap(),
            stream.activity_id("B").unwrap(),
        );
        let v = validate_candidate(&stream, 5, r, &config, &mut TestCache::new(), Direction::Forward)
            .unwrap();
        assert!(!v.confirmed);
        assert!(v.out_of_bounds);
        assert!(v.p_values.is_empty());
    }

    #[test]
    fn sudden_substitution_is_found_in_both_directions() {
        // <A,B,C,D> then <A,C,B,D>: adds A>C, C>B, B>D and removes A>B, B>C, C>D
        let log = log_of(&[(&["A", "B", "C", "D"], 150), (&["A", "C", "B", "D"], 150)]);
        let config = DetectorConfig::new(100);
        let report = detect(&log, &config).unwrap();
        assert_eq!(report.points.len(), 1, "{:?}", report.points);
        let p = &report.points[0];
        assert!((148..=152).contains(&p.trace_index), "{p:?}");
        assert_eq!(p.battery_p_values.len(), 2 * config.consecutive_tests);
        assert!(p.battery_p_values.iter().all(|&v| v < 0.05));
        assert_eq!(report.forward.len(), 1);
        assert_eq!(report.backward.len(), 1);
        assert!(p.merged_with.is_some());
    }

    #[test]
    fn backward_reports_forward_orientation() {
        let log = log_of(&[(&["A", "B", "C", "D"], 150), (&["A", "C", "B", "D"], 150)]);
        let config = DetectorConfig::new(100);
        let stream = to_event_stream(&log, Ordering::TraceMajor).unwrap();
        let back = detect_backward(&stream, &config, &mut TestCache::new()).unwrap();
        assert_eq!(back.len(), 1);
        let r = &back[0].trigger_relation;
        // removed relations only occur before the drift, in forward orientation
        let removed = [("A", "B"), ("B", "C"), ("C", "D")];
        assert!(
            removed.contains(&(r.source.as_str(), r.target.as_str())),
            "{r}"
        );
        assert!(back[0].trace_index <= 149);
        assert_eq!(back[0].direction, Direction::Backward);
    }

    #[test]
    fn reset_moves_reference_to_drift() {
        let log = log_of(&[
            (&["A", "B", "C", "D"], 120),
            (&["A", "C", "B", "D"], 120),
            (&["A", "B", "C", "D"], 120),
        ]);
        let stream = to_event_stream(&log, Ordering::TraceMajor).unwrap();
        let config = DetectorConfig::new(100);
        let fwd = detect_forward(&stream, &config, &mut TestCache::new()).unwrap();
        assert_eq!(fwd.len(), 2, "{fwd:?}");
        assert!(fwd[1].event_index - fwd[0].event_index >= config.window_size);
    }
}
