use super::{DriftPoint, MergedPartner};

/// Merges the two directional result lists. A point from one direction that
/// lies strictly closer than `window_size` events to an unpaired point of the
/// other direction is absorbed into the earlier of the two; points of the
/// same direction are never collapsed. Greedy, left to right.
pub fn merge_reports(forward: &[DriftPoint], backward: &[DriftPoint], window_size: usize) -> Vec<DriftPoint> {
    let mut all: Vec<&DriftPoint> = forward.iter().chain(backward).collect();
    all.sort_by_key(|p| (p.event_index, p.direction));

    let mut merged: Vec<DriftPoint> = Vec::with_capacity(all.len());
    for p in all {
        let partner = merged
            .iter_mut()
            .rev()
            .take_while(|q| p.event_index - q.event_index < window_size)
            .find(|q| q.direction != p.direction && q.merged_with.is_none());
        match partner {
            Some(q) => {
                q.merged_with = Some(MergedPartner {
                    direction: p.direction,
                    event_index: p.event_index,
                    trace_index: p.trace_index,
                });
            }
            None => merged.push(p.clone()),
        }
    }
    merged
}
