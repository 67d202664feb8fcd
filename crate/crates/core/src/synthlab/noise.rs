use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{Event, EventLog};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Inserted events carry a uniformly drawn activity of the log's alphabet
    /// and land at a uniform position of a uniform trace.
    #[default]
    Alphabet,
    /// Inserted events copy a uniformly drawn existing event and land right
    /// after it.
    Duplicate,
}

/// [`inject_noise_with`] in [`NoiseMode::Alphabet`].
pub fn inject_noise(log: &EventLog, add_fraction: f64, remove_fraction: f64, seed: u64) -> Result<EventLog> {
    inject_noise_with(log, add_fraction, remove_fraction, NoiseMode::Alphabet, seed)
}

/// Removes `⌊remove_fraction · n⌋` events, then inserts `⌊add_fraction · n⌋`
/// events, `n` being the original event count. Removals are drawn uniformly
/// without replacement among events whose trace would keep at least one
/// event. Trace count and order never change.
pub fn inject_noise_with(
    log: &EventLog,
    add_fraction: f64,
    remove_fraction: f64,
    mode: NoiseMode,
    seed: u64,
) -> Result<EventLog> {
    for f in [add_fraction, remove_fraction] {
        if !(0.0..1.0).contains(&f) {
            return Err(Error::NoiseFraction(f));
        }
    }
    let n = log.num_events();
    let to_remove = (remove_fraction * n as f64).floor() as usize;
    let to_add = (add_fraction * n as f64).floor() as usize;
    if to_remove > n - log.num_traces().min(n) {
        return Err(Error::NoiseFraction(remove_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = log.clone();

    if to_remove > 0 {
        let mut positions: Vec<(usize, usize)> = out
            .traces
            .iter()
            .enumerate()
            .flat_map(|(t, tr)| (0..tr.len()).map(move |j| (t, j)))
            .collect();
        positions.shuffle(&mut rng);
        let mut left: Vec<usize> = out.traces.iter().map(|t| t.len()).collect();
        let mut doomed = vec![Vec::new(); out.traces.len()];
        let mut removed = 0;
        for (t, j) in positions {
            if removed == to_remove {
                break;
            }
            if left[t] > 1 {
                left[t] -= 1;
                doomed[t].push(j);
                removed += 1;
            }
        }
        for (trace, mut gone) in out.traces.iter_mut().zip(doomed) {
            gone.sort_unstable();
            for j in gone.into_iter().rev() {
                trace.events.remove(j);
            }
        }
    }

    if to_add > 0 && !out.traces.is_empty() {
        let alphabet = log.alphabet();
        for _ in 0..to_add {
            match mode {
                NoiseMode::Alphabet => {
                    let t = rng.random_range(0..out.traces.len());
                    let trace = &mut out.traces[t];
                    let pos = rng.random_range(0..=trace.len());
                    let activity = alphabet[rng.random_range(0..alphabet.len())].clone();
                    let neighbour = pos.checked_sub(1).or((pos < trace.len()).then_some(pos));
                    let timestamp = neighbour.and_then(|k| trace.events[k].timestamp);
                    trace.events.insert(pos, Event { activity, timestamp });
                }
                NoiseMode::Duplicate => {
                    let total: usize = out.traces.iter().map(|t| t.len()).sum();
                    let mut k = rng.random_range(0..total);
                    let (t, j) = out
                        .traces
                        .iter()
                        .enumerate()
                        .find_map(|(t, tr)| {
                            if k < tr.len() {
                                Some((t, k))
                            } else {
                                k -= tr.len();
                                None
                            }
                        })
                        .expect("index within total");
                    let copy = out.traces[t].events[j].clone();
                    out.traces[t].events.insert(j + 1, copy);
                }
            }
        }
    }
    Ok(out)
}
