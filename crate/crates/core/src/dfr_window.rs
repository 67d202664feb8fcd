//! Directly-follows relations and the sliding reference window.
//!
//! An occurrence of `A > B` is counted in a window only when both events lie
//! inside it, so a window's multiset is a pure function of its slice. The
//! window is advanced one event at a time in O(1): the departing event drops
//! the pair it forms with its in-window successor and the entering event adds
//! the pair it forms with its in-window predecessor.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{ActivityId, EventStream, StreamEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DfRelation {
    pub source: ActivityId,
    pub target: ActivityId,
}

impl DfRelation {
    pub fn new(source: ActivityId, target: ActivityId) -> Self {
        DfRelation { source, target }
    }

    pub fn inverted(self) -> Self {
        DfRelation {
            source: self.target,
            target: self.source,
        }
    }

    pub fn display<'a>(&self, stream: &'a EventStream) -> RelationLabel<'a> {
        RelationLabel {
            source: stream.activity_label(self.source),
            target: stream.activity_label(self.target),
        }
    }
}

/// `A>B` rendering of a relation.
pub struct RelationLabel<'a> {
    pub source: &'a str,
    pub target: &'a str,
}

impl fmt::Display for RelationLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.source, self.target)
    }
}

/// Multiset of relation types. Types with zero occurrences are never stored.
pub type RelationCounts = HashMap<DfRelation, u32>;

/// Counts every pair of same-trace, within-trace-adjacent events that both lie
/// in `range`.
pub fn extract_df_relations(stream: &EventStream, range: Range<usize>) -> RelationCounts {
    let events = stream.events();
    let mut counts = RelationCounts::new();
    for e in &events[range.clone()] {
        if let Some(p) = e.pred {
            if range.contains(&(p as usize)) {
                let pred = &events[p as usize];
                *counts.entry(DfRelation::new(pred.activity, e.activity)).or_insert(0) += 1;
            }
        }
    }
    counts
}

fn relation_between(events: &[StreamEvent], from: usize, to: usize) -> DfRelation {
    DfRelation::new(events[from].activity, events[to].activity)
}

fn decrement(counts: &mut RelationCounts, r: DfRelation) {
    if let Some(c) = counts.get_mut(&r) {
        *c -= 1;
        if *c == 0 {
            counts.remove(&r);
        }
    }
}

/// A fixed-size window `[start, start + size)` with its relation multiset,
/// maintained incrementally.
#[derive(Debug, Clone)]
pub struct SlidingRelations {
    start: usize,
    size: usize,
    counts: RelationCounts,
}

impl SlidingRelations {
    pub fn new(stream: &EventStream, start: usize, size: usize) -> Result<Self> {
        if size == 0 || start + size > stream.len() {
            return Err(Error::WindowOutOfRange {
                start,
                size,
                len: stream.len(),
            });
        }
        Ok(SlidingRelations {
            start,
            size,
            counts: extract_df_relations(stream, start..start + size),
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn end(&self) -> usize {
        self.start + self.size
    }

    pub fn counts(&self) -> &RelationCounts {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn advance(&mut self, stream: &EventStream) -> Result<()> {
        let end = self.end();
        if end >= stream.len() {
            return Err(Error::WindowOutOfRange {
                start: self.start + 1,
                size: self.size,
                len: stream.len(),
            });
        }
        let events = stream.events();
        let departing = &events[self.start];
        if let Some(s) = departing.succ {
            if (s as usize) < end {
                decrement(&mut self.counts, relation_between(events, self.start, s as usize));
            }
        }
        let entering = &events[end];
        if let Some(p) = entering.pred {
            if p as usize > self.start {
                *self
                    .counts
                    .entry(relation_between(events, p as usize, end))
                    .or_insert(0) += 1;
            }
        }
        self.start += 1;
        Ok(())
    }
}

/// Reference window of the detector: the sliding multiset plus per-trace
/// bookkeeping and the set of relation types suppressed from the novelty set
/// after a failed validation.
#[derive(Debug, Clone)]
pub struct WindowState {
    relations: SlidingRelations,
    per_trace_last: HashMap<u32, usize>,
    excluded: HashSet<DfRelation>,
}

impl WindowState {
    pub fn new(stream: &EventStream, start: usize, size: usize) -> Result<Self> {
        let relations = SlidingRelations::new(stream, start, size)?;
        let per_trace_last = stream.events()[start..start + size]
            .iter()
            .map(|e| (e.trace, e.stream_index))
            .collect();
        Ok(WindowState {
            relations,
            per_trace_last,
            excluded: HashSet::new(),
        })
    }

    pub fn start(&self) -> usize {
        self.relations.start()
    }

    pub fn size(&self) -> usize {
        self.relations.size()
    }

    pub fn end(&self) -> usize {
        self.relations.end()
    }

    pub fn relation_counts(&self) -> &RelationCounts {
        self.relations.counts()
    }

    pub fn per_trace_last(&self) -> &HashMap<u32, usize> {
        &self.per_trace_last
    }

    pub fn excluded(&self) -> &HashSet<DfRelation> {
        &self.excluded
    }

    /// Slides the window one event forward. Excluded types whose last
    /// occurrence left the window are dropped from the exclusion set.
    pub fn advance(&mut self, stream: &EventStream) -> Result<()> {
        let start = self.start();
        self.relations.advance(stream)?;
        let departing = &stream.events()[start];
        if self.per_trace_last.get(&departing.trace) == Some(&start) {
            self.per_trace_last.remove(&departing.trace);
        }
        let entering = &stream.events()[self.end() - 1];
        self.per_trace_last
            .insert(entering.trace, entering.stream_index);
        if !self.excluded.is_empty() {
            let counts = self.relations.counts();
            self.excluded.retain(|r| counts.contains_key(r));
        }
        Ok(())
    }

    /// The relation the event right after the window forms with the latest
    /// in-window event of its trace, if that trace has one.
    pub fn peek_new_relation(&self, stream: &EventStream, e: &StreamEvent) -> Option<DfRelation> {
        debug_assert_eq!(e.stream_index, self.end());
        self.per_trace_last
            .get(&e.trace)
            .map(|&p| DfRelation::new(stream.events()[p].activity, e.activity))
    }

    pub fn is_novel(&self, r: &DfRelation) -> bool {
        !self.relations.counts().contains_key(r) || self.excluded.contains(r)
    }

    /// Marks `r` as unseen for the novelty check. Counts are left untouched.
    pub fn exclude_relation(&mut self, r: DfRelation) {
        self.excluded.insert(r);
    }

    /// Approximate heap footprint in entries, for memory accounting.
    pub fn footprint(&self) -> usize {
        self.relations.counts().len() + self.per_trace_last.len() + self.excluded.len()
    }
}
