//! Event logs, event streams and their on-disk formats.
//!
//! An [`EventLog`] is an ordered collection of traces, each an ordered
//! sequence of activity executions. Detection does not run on the log
//! directly: it is first flattened into an [`EventStream`] where every event
//! carries a position, the id of its trace and the position of its
//! within-trace predecessor and successor.

mod csv;
mod stream;
mod write;
mod xes;

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use self::csv::{parse_csv, ColumnMapping};
pub use self::stream::{
    split_log, split_stream, to_event_stream, ActivityId, EventStream, Ordering, StreamEvent,
};
pub use self::write::{write_csv, write_xes};
pub use self::xes::parse_xes;

/// Milliseconds since the Unix epoch, UTC. Serialized as RFC 3339 text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Timestamp::parse(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid timestamp `{raw}`")))
    }
}

impl Timestamp {
    pub fn from_datetime<Tz: chrono::TimeZone>(dt: &DateTime<Tz>) -> Self {
        Timestamp(dt.timestamp_millis())
    }

    pub fn to_datetime(self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp_millis(self.0)
    }

    pub fn to_rfc3339(self) -> String {
        match self.to_datetime() {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
            None => self.0.to_string(),
        }
    }

    /// Accepts RFC 3339, naive `YYYY-MM-DD[ T]HH:MM:SS[.fff]` (read as UTC),
    /// plain dates and integer epoch milliseconds.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Some(Self::from_datetime(&dt));
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
            if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
                return Some(Timestamp(naive.and_utc().timestamp_millis()));
            }
        }
        if let Ok(date) = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return date
                .and_hms_opt(0, 0, 0)
                .map(|naive| Timestamp(naive.and_utc().timestamp_millis()));
        }
        s.parse::<i64>().ok().map(Timestamp)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub activity: String,
    pub timestamp: Option<Timestamp>,
}

impl Event {
    pub fn new(activity: impl Into<String>) -> Self {
        Event {
            activity: activity.into(),
            timestamp: None,
        }
    }

    pub fn at(activity: impl Into<String>, timestamp: Timestamp) -> Self {
        Event {
            activity: activity.into(),
            timestamp: Some(timestamp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn new(id: impl Into<String>, events: Vec<Event>) -> Self {
        Trace {
            id: id.into(),
            events,
        }
    }

    /// Builds an untimed trace from activity labels.
    pub fn from_activities<S: AsRef<str>>(id: impl Into<String>, activities: &[S]) -> Self {
        Trace::new(
            id,
            activities.iter().map(|a| Event::new(a.as_ref())).collect(),
        )
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub traces: Vec<Trace>,
}

impl EventLog {
    pub fn new(traces: Vec<Trace>) -> Self {
        EventLog { traces }
    }

    pub fn num_traces(&self) -> usize {
        self.traces.len()
    }

    pub fn num_events(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Sorted, de-duplicated activity labels.
    pub fn alphabet(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .traces
            .iter()
            .flat_map(|t| t.activities())
            .collect::<HashSet<_>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        labels.sort();
        labels
    }

    /// Checks the log-level invariants: unique trace ids and non-empty labels.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.traces.len());
        for trace in &self.traces {
            if !seen.insert(trace.id.as_str()) {
                return Err(Error::DuplicateTrace(trace.id.clone()));
            }
            if let Some(event) = trace.events.iter().position(|e| e.activity.is_empty()) {
                return Err(Error::MissingActivity {
                    trace: trace.id.clone(),
                    event,
                });
            }
        }
        Ok(())
    }

    /// True when every trace with timestamps lists them in non-decreasing order.
    pub fn timestamps_monotone(&self) -> bool {
        self.traces.iter().all(|t| {
            t.events
                .iter()
                .filter_map(|e| e.timestamp)
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[0] <= w[1])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_formats() {
        let a = Timestamp::parse("2018-01-02T03:04:05.678+00:00").unwrap();
        let b = Timestamp::parse("2018-01-02 03:04:05.678").unwrap();
        let c = Timestamp::parse("2018-01-02T04:04:05.678+01:00").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_rfc3339(), "2018-01-02T03:04:05.678Z");
        assert_eq!(Timestamp::parse("1500"), Some(Timestamp(1500)));
        assert_eq!(
            Timestamp::parse("2018-01-02"),
            Timestamp::parse("2018-01-02T00:00:00Z")
        );
        assert!(Timestamp::parse("yesterday").is_none());
    }

    #[test]
    fn duplicate_trace_ids_rejected() {
        let log = EventLog::new(vec![
            Trace::from_activities("t1", &["A"]),
            Trace::from_activities("t1", &["B"]),
        ]);
        assert!(matches!(log.validate(), Err(Error::DuplicateTrace(id)) if id == "t1"));
    }

    #[test]
    fn alphabet_is_sorted_and_unique() {
        let log = EventLog::new(vec![
            Trace::from_activities("t1", &["C", "A"]),
            Trace::from_activities("t2", &["A", "B"]),
        ]);
        assert_eq!(log.alphabet(), vec!["A", "B", "C"]);
        assert_eq!(log.num_events(), 4);
    }
}
