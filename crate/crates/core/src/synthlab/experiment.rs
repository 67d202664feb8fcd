//! Batch runs: generate drifted logs, add noise, detect and score.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::generate::{alternating_segments, generate_drift_log, GroundTruth};
use super::model::{base_model, ProcessModel};
use super::noise::{inject_noise_with, NoiseMode};
use super::patterns::NamedPattern;
use super::score::{score, ScoreResult};
use crate::detector::{detect, DetectorConfig};
use crate::error::{Error, Result};
use crate::event_model::EventLog;

const NOISE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub base: ProcessModel,
    pub patterns: Vec<NamedPattern>,
    pub seeds: Vec<u64>,
    pub segments: usize,
    pub traces_per_segment: usize,
    /// Fraction of events both removed and added.
    pub noise: f64,
    pub noise_mode: NoiseMode,
    pub detector: DetectorConfig,
    pub ets: Vec<usize>,
    /// Worker threads; 0 uses the available parallelism.
    #[serde(skip)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(patterns: Vec<NamedPattern>, seeds: Vec<u64>, detector: DetectorConfig) -> Self {
        ExperimentConfig {
            base: base_model(),
            patterns,
            seeds,
            segments: 10,
            traces_per_segment: 100,
            noise: 0.0,
            noise_mode: NoiseMode::Alphabet,
            detector,
            ets: vec![10, 50],
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub seed: Option<u64>,
    pub noise: f64,
    pub events: usize,
    pub detected: Vec<usize>,
    pub actual: Vec<usize>,
    /// One score per tolerance, in the order requested.
    pub scores: Vec<(usize, ScoreResult)>,
    pub mean_ms_per_event: f64,
}

impl RunRecord {
    pub fn score_at(&self, et: usize) -> Option<&ScoreResult> {
        self.scores.iter().find(|(e, _)| *e == et).map(|(_, s)| s)
    }
}

/// Detects drifts in `log` and scores them against `truth`.
pub fn evaluate_log(
    name: &str,
    log: &EventLog,
    truth: &GroundTruth,
    detector: &DetectorConfig,
    ets: &[usize],
) -> Result<RunRecord> {
    truth.validate(log.num_traces())?;
    let report = detect(log, detector)?;
    let detected = report.trace_indexes();
    let actual = truth.drift_trace_indexes.clone();
    Ok(RunRecord {
        name: name.to_owned(),
        seed: None,
        noise: 0.0,
        events: log.num_events(),
        scores: ets.iter().map(|&et| (et, score(&detected, &actual, et))).collect(),
        detected,
        actual,
        mean_ms_per_event: report.stats.mean_ms_per_event,
    })
}

/// Builds the drifted (and possibly noisy) log of one suite job.
pub fn suite_log(
    config: &ExperimentConfig,
    pattern: &NamedPattern,
    seed: u64,
) -> Result<(EventLog, GroundTruth)> {
    let changed = pattern.apply(&config.base)?;
    let segments = alternating_segments(&config.base, &changed, &pattern.name, config.segments);
    let (log, truth) = generate_drift_log(&segments, config.traces_per_segment, seed)?;
    if config.noise > 0.0 {
        let noisy = inject_noise_with(
            &log,
            config.noise,
            config.noise,
            config.noise_mode,
            seed ^ NOISE_SEED_SALT,
        )?;
        return Ok((noisy, truth));
    }
    Ok((log, truth))
}

/// Runs every (pattern, seed) job; records come back in pattern-major,
/// seed-minor order whatever the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    if config.patterns.is_empty() || config.seeds.is_empty() {
        return Err(Error::Config("experiment needs at least one pattern and one seed".into()));
    }
    if config.ets.is_empty() {
        return Err(Error::Config("experiment needs at least one error tolerance".into()));
    }
    let jobs: Vec<(&NamedPattern, u64)> = config
        .patterns
        .iter()
        .flat_map(|p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let threads = match config.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(jobs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let k = next.fetch_add(1, AtomicOrdering::Relaxed);
                let Some(&(pattern, seed)) = jobs.get(k) else {
                    break;
                };
                let outcome = run_job(config, pattern, seed);
                results.lock().expect("results lock")[k] = Some(outcome);
            });
        }
    });
    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn run_job(config: &ExperimentConfig, pattern: &NamedPattern, seed: u64) -> Result<RunRecord> {
    let (log, truth) = suite_log(config, pattern, seed)?;
    let mut record = evaluate_log(&pattern.name, &log, &truth, &config.detector, &config.ets)?;
    record.seed = Some(seed);
    record.noise = config.noise;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub et: usize,
    pub runs: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Means per name (in first-appearance order) followed by the mean over all
/// records under the name `all`, for each tolerance.
pub fn summarize(records: &[RunRecord], ets: &[usize]) -> Vec<Summary> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.name.as_str()) {
            names.push(&r.name);
        }
    }
    let mut out = Vec::new();
    for &et in ets {
        let groups = names
            .iter()
            .map(|&n| (n, records.iter().filter(|r| r.name == n).collect::<Vec<_>>()))
            .chain(std::iter::once(("all", records.iter().collect())));
        for (name, group) in groups {
            let scores: Vec<&ScoreResult> = group.iter().filter_map(|r| r.score_at(et)).collect();
            if scores.is_empty() {
                continue;
            }
            let mean = |f: fn(&ScoreResult) -> f64| scores.iter().map(|s| f(s)).sum::<f64>() / scores.len() as f64;
            out.push(Summary {
                name: name.to_owned(),
                et,
                runs: scores.len(),
                precision: mean(|s| s.precision),
                recall: mean(|s| s.recall),
                f_score: mean(|s| s.f_score),
                tp: scores.iter().map(|s| s.tp).sum(),
                fp: scores.iter().map(|s| s.fp).sum(),
                fn_: scores.iter().map(|s| s.fn_).sum(),
            });
        }
    }
    out
}

/// One row per run, then one `mean` row per name and one for everything.
/// Each tolerance contributes its own precision/recall/f columns.
pub fn write_results_csv<W: Write>(records: &[RunRecord], ets: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["row", "name", "seed", "noise", "events", "detected", "actual"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for et in ets {
        for m in ["tp", "fp", "fn", "precision", "recall", "f_score"] {
            header.push(format!("{m}_et{et}"));
        }
    }
    w.write_record(&header)?;
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    for r in records {
        let mut row = vec![
            "run".to_owned(),
            r.name.clone(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.noise.to_string(),
            r.events.to_string(),
            join(&r.detected),
            join(&r.actual),
        ];
        for &et in ets {
            match r.score_at(et) {
                Some(s) => row.extend([
                    s.tp.to_string(),
                    s.fp.to_string(),
                    s.fn_.to_string(),
                    format!("{:.4}", s.precision),
                    format!("{:.4}", s.recall),
                    format!("{:.4}", s.f_score),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
        }
        w.write_record(&row)?;
    }
    let summaries = summarize(records, ets);
    let mut names: Vec<&str> = summaries.iter().map(|s| s.name.as_str()).collect();
    names.dedup();
    let mut seen = Vec::new();
    for name in names {
        if seen.contains(&name) {
            continue;
        }
        seen.push(name);
        let group: Vec<&RunRecord> = records.iter().filter(|r| name == "all" || r.name == name).collect();
        let mut row = vec![
            "mean".to_owned(),
            name.to_owned(),
            String::new(),
            group.first().map(|r| r.noise.to_string()).unwrap_or_default(),
            String::new(),
            String::new(),
            String::new(),
        ];
        for &et in ets {
            match summaries.iter().find(|s| s.name == name && s.et == et) {
                Some(s) => row.extend([
                    s.tp.to_string(),
                    s.fp.to_string(),
                    s.fn_.to_string(),
                    format!("{:.4}", s.precision),
                    format!("{:.4}", s.recall),
                    format!("{:.4}", s.f_score),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
