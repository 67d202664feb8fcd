use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Event, EventLog, Timestamp, Trace};
use crate::error::{Error, Result};

/// Interned activity label. Ids follow the lexicographic order of the labels,
/// so comparing ids compares labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// All events of trace i before all events of trace i+1.
    #[default]
    #[value(name = "trace")]
    TraceMajor,
    /// Sorted by timestamp; ties keep trace order, then within-trace order.
    #[value(name = "timestamp")]
    Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamEvent {
    pub stream_index: usize,
    /// Index of the owning trace in log order.
    pub trace: u32,
    /// Forward position inside the owning trace.
    pub position: u32,
    pub activity: ActivityId,
    pub timestamp: Option<Timestamp>,
    /// Stream index of the previous event of the same trace, in stream direction.
    pub pred: Option<u32>,
    /// Stream index of the next event of the same trace, in stream direction.
    pub succ: Option<u32>,
}

/// Immutable, indexed sequence of events consumed by the detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    events: Vec<StreamEvent>,
    activities: Arc<Vec<String>>,
    trace_ids: Arc<Vec<String>>,
    ordering: Ordering,
    reversed: bool,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[StreamEvent] {
        &self.events
    }

    pub fn get(&self, index: usize) -> Option<&StreamEvent> {
        self.events.get(index)
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn activity_label(&self, id: ActivityId) -> &str {
        &self.activities[id.0 as usize]
    }

    pub fn activity_id(&self, label: &str) -> Option<ActivityId> {
        self.activities
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| ActivityId(i as u32))
    }

    pub fn num_traces(&self) -> usize {
        self.trace_ids.len()
    }

    pub fn trace_id(&self, trace: u32) -> &str {
        &self.trace_ids[trace as usize]
    }

    /// Maps an index of this stream to the index of the same event in the
    /// forward orientation.
    pub fn forward_index(&self, index: usize) -> usize {
        if self.reversed {
            self.events.len() - 1 - index
        } else {
            index
        }
    }

    /// The stream read back to front. Within-trace predecessor and successor
    /// swap roles, so every directly-follows pair is inverted.
    pub fn reversed(&self) -> EventStream {
        let n = self.events.len();
        let flip = |i: Option<u32>| i.map(|i| (n - 1 - i as usize) as u32);
        let events = self
            .events
            .iter()
            .rev()
            .enumerate()
            .map(|(i, e)| StreamEvent {
                stream_index: i,
                pred: flip(e.succ),
                succ: flip(e.pred),
                ..*e
            })
            .collect();
        EventStream {
            events,
            activities: Arc::clone(&self.activities),
            trace_ids: Arc::clone(&self.trace_ids),
            ordering: self.ordering,
            reversed: !self.reversed,
        }
    }

    /// Regroups the events into a log, in forward within-trace order.
    pub fn to_log(&self) -> EventLog {
        self.to_logs_by(|_| 0, 1).pop().unwrap_or_default()
    }

    /// Partitions traces into `parts` logs by `side(trace)`.
    fn to_logs_by(&self, side: impl Fn(u32) -> usize, parts: usize) -> Vec<EventLog> {
        let mut traces: Vec<Vec<(u32, Event)>> = vec![Vec::new(); self.trace_ids.len()];
        for e in &self.events {
            let event = Event {
                activity: self.activity_label(e.activity).to_owned(),
                timestamp: e.timestamp,
            };
            traces[e.trace as usize].push((e.position, event));
        }
        let mut logs = vec![EventLog::default(); parts];
        for (idx, mut events) in traces.into_iter().enumerate() {
            events.sort_by_key(|(pos, _)| *pos);
            let trace = Trace::new(
                self.trace_ids[idx].clone(),
                events.into_iter().map(|(_, e)| e).collect(),
            );
            logs[side(idx as u32)].traces.push(trace);
        }
        logs
    }
}

pub fn to_event_stream(log: &EventLog, ordering: Ordering) -> Result<EventStream> {
    let alphabet = log.alphabet();
    let intern = |label: &str| {
        ActivityId(alphabet.binary_search_by(|l| l.as_str().cmp(label)).unwrap() as u32)
    };

    // (trace index, position within trace) in stream order
    let mut order: Vec<(u32, u32)> = log
        .traces
        .iter()
        .enumerate()
        .flat_map(|(t, trace)| (0..trace.events.len() as u32).map(move |p| (t as u32, p)))
        .collect();

    if ordering == Ordering::Timestamp {
        let mut keyed = Vec::with_capacity(order.len());
        for (t, p) in order {
            let trace = &log.traces[t as usize];
            let ts = trace.events[p as usize]
                .timestamp
                .ok_or_else(|| Error::MissingTimestamp {
                    trace: trace.id.clone(),
                    event: p as usize,
                })?;
            keyed.push((ts, t, p));
        }
        keyed.sort();
        order = keyed.into_iter().map(|(_, t, p)| (t, p)).collect();
    }

    let mut last_seen: Vec<Option<u32>> = vec![None; log.traces.len()];
    let mut events: Vec<StreamEvent> = Vec::with_capacity(order.len());
    for (i, (t, p)) in order.into_iter().enumerate() {
        let source = &log.traces[t as usize].events[p as usize];
        let pred = last_seen[t as usize].replace(i as u32);
        if let Some(pred) = pred {
            events[pred as usize].succ = Some(i as u32);
        }
        events.push(StreamEvent {
            stream_index: i,
            trace: t,
            position: p,
            activity: intern(&source.activity),
            timestamp: source.timestamp,
            pred,
            succ: None,
        });
    }

    Ok(EventStream {
        events,
        activities: Arc::new(alphabet),
        trace_ids: Arc::new(log.traces.iter().map(|t| t.id.clone()).collect()),
        ordering,
        reversed: false,
    })
}

/// Cuts a log in two at a forward stream index. Traces lying entirely on one
/// side go there; a trace straddling the boundary goes to the side holding
/// most of its events, the first log on a tie.
pub fn split_stream(stream: &EventStream, boundary: usize) -> Result<(EventLog, EventLog)> {
    let n = stream.len();
    if boundary > n {
        return Err(Error::BoundaryOutOfRange { boundary, len: n });
    }
    let mut before = vec![0usize; stream.num_traces()];
    let mut total = vec![0usize; stream.num_traces()];
    for e in stream.events() {
        let t = e.trace as usize;
        total[t] += 1;
        if stream.forward_index(e.stream_index) < boundary {
            before[t] += 1;
        }
    }
    let mut logs = stream.to_logs_by(
        |t| {
            let t = t as usize;
            if 2 * before[t] >= total[t] {
                0
            } else {
                1
            }
        },
        2,
    );
    let second = logs.pop().unwrap();
    let first = logs.pop().unwrap();
    Ok((first, second))
}

pub fn split_log(log: &EventLog, ordering: Ordering, boundary: usize) -> Result<(EventLog, EventLog)> {
    split_stream(&to_event_stream(log, ordering)?, boundary)
}
