use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::contingency::build_contingency;
use super::gamma::chi_square_sf;
use crate::detector::Direction;
use crate::dfr_window::{DfRelation, RelationCounts};
use crate::error::Result;

/// Result of one reference/detection window comparison.
///
/// A table with a single relation type admits no test; such outcomes carry
/// `degrees_of_freedom == 0` and `p_value == 1.0`, so they never pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub g_statistic: f64,
    pub degrees_of_freedom: u32,
    pub p_value: f64,
    /// Residual of each type's detection-window cell.
    pub asr_by_type: HashMap<DfRelation, f64>,
}

impl TestOutcome {
    pub fn is_testable(&self) -> bool {
        self.degrees_of_freedom > 0
    }

    /// Residual of `r` in the detection window; 0 when `r` occurs in neither
    /// window.
    pub fn asr(&self, r: &DfRelation) -> f64 {
        self.asr_by_type.get(r).copied().unwrap_or(0.0)
    }
}

pub fn run_test(reference: &RelationCounts, detection: &RelationCounts) -> Result<TestOutcome> {
    let table = build_contingency(reference, detection)?;
    let (g, df) = table.g_statistic();
    let p_value = if df == 0 { 1.0 } else { chi_square_sf(g, df)? };
    let asr_by_type = table
        .columns()
        .iter()
        .enumerate()
        .map(|(j, r)| (*r, table.asr(1, j).value))
        .collect();
    Ok(TestOutcome {
        g_statistic: g,
        degrees_of_freedom: df,
        p_value,
        asr_by_type,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TestKey {
    pub direction: Direction,
    /// Start of the reference window; the detection window follows it.
    pub ref_start: usize,
}

/// Stores each window-pair outcome so that a position is tested at most once
/// per run.
#[derive(Debug, Default)]
pub struct TestCache {
    entries: HashMap<TestKey, Arc<TestOutcome>>,
    computations: usize,
}

impl TestCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cached_test(
        &mut self,
        key: TestKey,
        reference: &RelationCounts,
        detection: &RelationCounts,
    ) -> Result<Arc<TestOutcome>> {
        if let Some(hit) = self.entries.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let outcome = Arc::new(run_test(reference, detection)?);
        self.computations += 1;
        self.entries.insert(key, Arc::clone(&outcome));
        Ok(outcome)
    }

    pub fn get(&self, key: &TestKey) -> Option<&Arc<TestOutcome>> {
        self.entries.get(key)
    }

    /// Number of tests actually computed (cache misses).
    pub fn computations(&self) -> usize {
        self.computations
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops entries of `direction` whose reference window starts before
    /// `min_start`. The detector never moves its reference window backwards,
    /// so such entries cannot be requested again.
    pub fn evict_before(&mut self, direction: Direction, min_start: usize) {
        self.entries
            .retain(|k, _| k.direction != direction || k.ref_start >= min_start);
    }
}
