use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// `(detected, actual)` pairs counted as true positives.
    pub matching: Vec<(usize, usize)>,
}

impl ScoreResult {
    fn from_counts(tp: usize, fp: usize, fn_: usize, matching: Vec<(usize, usize)>) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_score = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ScoreResult {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_score,
            matching,
        }
    }
}

/// Scores detected against actual drift trace indexes. A detection `t` is a
/// true positive when an actual drift lies in `[t - et, t + et]`; detections
/// are taken in ascending order and each claims the nearest unclaimed actual
/// in range (the smaller one on ties).
pub fn score(detected: &[usize], actual: &[usize], et: usize) -> ScoreResult {
    let mut detected = detected.to_vec();
    detected.sort_unstable();
    let mut actual = actual.to_vec();
    actual.sort_unstable();
    let mut claimed = vec![false; actual.len()];
    let mut matching = Vec::new();
    for &t in &detected {
        let lo = actual.partition_point(|&a| a + et < t);
        let best = (lo..actual.len())
            .take_while(|&k| actual[k] <= t + et)
            .filter(|&k| !claimed[k])
            .min_by_key(|&k| actual[k].abs_diff(t));
        if let Some(k) = best {
            claimed[k] = true;
            matching.push((t, actual[k]));
        }
    }
    let tp = matching.len();
    ScoreResult::from_counts(tp, detected.len() - tp, actual.len() - tp, matching)
}
