use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::ProcessModel;
use crate::error::{Error, Result};
use crate::event_model::{Event, EventLog, Timestamp, Trace};

/// 2020-01-01T00:00:00Z
const EPOCH_MS: i64 = 1_577_836_800_000;
const TRACE_SPACING_MS: i64 = 3_600_000;
const EVENT_SPACING_MS: i64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub first_trace: usize,
    pub num_traces: usize,
    pub description: String,
    pub model: ProcessModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Index of the first trace of every segment but the first.
    pub drift_trace_indexes: Vec<usize>,
    pub segments: Vec<Segment>,
}

impl GroundTruth {
    pub fn validate(&self, num_traces: usize) -> Result<()> {
        let ok = self.drift_trace_indexes.windows(2).all(|w| w[0] < w[1])
            && self.drift_trace_indexes.iter().all(|&i| i < num_traces);
        if ok {
            Ok(())
        } else {
            Err(Error::Model(
                "drift indexes must be strictly increasing and inside the log".into(),
            ))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

/// Samples `traces_per_segment` traces from each model in turn. Trace `i`
/// starts an hour after trace `i - 1` and its events are a second apart, so
/// timestamp order equals trace order.
pub fn generate_drift_log(
    segments: &[(String, ProcessModel)],
    traces_per_segment: usize,
    seed: u64,
) -> Result<(EventLog, GroundTruth)> {
    if segments.len() < 2 {
        return Err(Error::Model("a drift log needs at least two segments".into()));
    }
    if traces_per_segment == 0 {
        return Err(Error::Model("segments must hold at least one trace".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::with_capacity(segments.len() * traces_per_segment);
    let mut truth = GroundTruth {
        drift_trace_indexes: Vec::new(),
        segments: Vec::new(),
    };
    for (k, (description, model)) in segments.iter().enumerate() {
        model.validate()?;
        let first = traces.len();
        if k > 0 {
            truth.drift_trace_indexes.push(first);
        }
        for _ in 0..traces_per_segment {
            let i = traces.len();
            let start = EPOCH_MS + i as i64 * TRACE_SPACING_MS;
            let events = model
                .sample_trace(&mut rng)
                .into_iter()
                .enumerate()
                .map(|(j, a)| Event::at(a, Timestamp(start + j as i64 * EVENT_SPACING_MS)))
                .collect();
            traces.push(Trace::new(format!("trace-{i}"), events));
        }
        truth.segments.push(Segment {
            first_trace: first,
            num_traces: traces_per_segment,
            description: description.clone(),
            model: model.clone(),
        });
    }
    Ok((EventLog::new(traces), truth))
}

/// `count` segments alternating between `base` and `changed`, starting with
/// `base`.
pub fn alternating_segments(
    base: &ProcessModel,
    changed: &ProcessModel,
    change_name: &str,
    count: usize,
) -> Vec<(String, ProcessModel)> {
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                ("base".to_owned(), base.clone())
            } else {
                (change_name.to_owned(), changed.clone())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::model::{base_model, Node};
    use super::super::patterns::standard_pattern;
    use super::*;
    use crate::event_model::{to_event_stream, Ordering};

    fn two_models() -> (ProcessModel, ProcessModel) {
        let base = base_model();
        let changed = standard_pattern("serial_insert").unwrap().apply(&base).unwrap();
        (base, changed)
    }

    #[test]
    fn two_segments_one_drift() {
        let (b, c) = two_models();
        let (log, truth) = generate_drift_log(&alternating_segments(&b, &c, "x", 2), 500, 1).unwrap();
        assert_eq!(log.num_traces(), 1000);
        assert_eq!(truth.drift_trace_indexes, vec![500]);
        truth.validate(log.num_traces()).unwrap();
    }

    #[test]
    fn ten_segments_nine_drifts() {
        let (b, c) = two_models();
        let (log, truth) = generate_drift_log(&alternating_segments(&b, &c, "x", 10), 100, 1).unwrap();
        assert_eq!(log.num_traces(), 1000);
        assert_eq!(truth.drift_trace_indexes, (1..10).map(|k| k * 100).collect::<Vec<_>>());
        assert_eq!(truth.segments[3].description, "x");
        assert_eq!(truth.segments[4].description, "base");
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let (b, c) = two_models();
        let segs = alternating_segments(&b, &c, "x", 4);
        let (l1, _) = generate_drift_log(&segs, 50, 9).unwrap();
        let (l2, _) = generate_drift_log(&segs, 50, 9).unwrap();
        let (l3, _) = generate_drift_log(&segs, 50, 10).unwrap();
        assert_eq!(l1, l2);
        assert_ne!(l1, l3);
    }

    #[test]
    fn segments_use_their_own_model() {
        let (b, c) = two_models();
        let (log, _) = generate_drift_log(&alternating_segments(&b, &c, "x", 2), 200, 3).unwrap();
        assert!(log.traces[..200].iter().all(|t| !t.activities().any(|a| a == "N")));
        assert!(log.traces[200..].iter().all(|t| t.activities().nth(1) == Some("N")));
    }

    #[test]
    fn timestamp_order_equals_trace_order() {
        let (b, c) = two_models();
        let (log, _) = generate_drift_log(&alternating_segments(&b, &c, "x", 2), 30, 3).unwrap();
        let a = to_event_stream(&log, Ordering::TraceMajor).unwrap();
        let t = to_event_stream(&log, Ordering::Timestamp).unwrap();
        assert_eq!(a.events(), t.events());
        assert!(log.timestamps_monotone());
    }

    #[test]
    fn needs_two_segments() {
        let m = ProcessModel::new(Node::activity("A")).unwrap();
        assert!(generate_drift_log(&[("a".into(), m)], 10, 0).is_err());
    }

    #[test]
    fn truth_validation_and_json() {
        let (b, c) = two_models();
        let (_, truth) = generate_drift_log(&alternating_segments(&b, &c, "x", 3), 10, 0).unwrap();
        let back = GroundTruth::from_json(&truth.to_json()).unwrap();
        assert_eq!(back, truth);
        assert!(truth.validate(15).is_err());
        let unsorted = GroundTruth {
            drift_trace_indexes: vec![5, 3],
            segments: vec![],
        };
        assert!(unsorted.validate(10).is_err());
    }
}
