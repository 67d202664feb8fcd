use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{SecondsFormat, Utc};

use super::manifest::RunManifest;
use super::{
    CliError, Command, DetectArgs, EvaluateArgs, FormatArgs, GenerateArgs, LogFormat, NoiseArgs, ReplayArgs,
};
use crate::detector::{detect, write_report_csv, write_report_json, DriftReport};
use crate::event_model::{parse_csv, parse_xes, write_csv, write_xes, EventLog, Ordering};
use crate::synthlab::{
    alternating_segments, base_model, evaluate_log, generate_drift_log, inject_noise_with, run_experiment,
    standard_pattern, standard_patterns, summarize, write_results_csv, ExperimentConfig, GroundTruth, NamedPattern,
    ProcessModel, RunRecord,
};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const RESULTS_CSV: &str = "results.csv";
const TRUTH_SUFFIX: &str = ".truth.json";

#[derive(Debug, Default)]
struct Outcome {
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    mean_ms_per_event: Option<f64>,
}

/// Runs a non-replay command and writes its manifest.
pub fn run_recorded(mut command: Command) -> Result<(), CliError> {
    absolutize(&mut command)?;
    let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let clock = Instant::now();
    let (out_dir, outcome) = match &mut command {
        Command::Detect(a) => (a.out_dir.clone(), detect_cmd(a)?),
        Command::Generate(a) => (a.out_dir.clone(), generate_cmd(a)?),
        Command::Noise(a) => (a.out_dir.clone(), noise_cmd(a)?),
        Command::Evaluate(a) => (a.out_dir.clone(), evaluate_cmd(a)?),
        Command::Replay(_) => return Err(CliError::Usage("replay cannot be recorded".into())),
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: command.clone(),
        seed: outcome.seed,
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        started_at,
        wall_seconds: clock.elapsed().as_secs_f64(),
        mean_ms_per_event: outcome.mean_ms_per_event,
    };
    manifest.write(&out_dir)?;
    Ok(())
}

pub fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let mut command = RunManifest::read(&args.manifest)?.command;
    if let Some(dir) = &args.out_dir {
        match &mut command {
            Command::Detect(a) => a.out_dir = dir.clone(),
            Command::Generate(a) => a.out_dir = dir.clone(),
            Command::Noise(a) => a.out_dir = dir.clone(),
            Command::Evaluate(a) => a.out_dir = dir.clone(),
            Command::Replay(_) => {}
        }
    }
    if matches!(command, Command::Replay(_)) {
        return Err(CliError::Input("manifest records a replay".into()));
    }
    run_recorded(command)
}

fn absolutize(command: &mut Command) -> Result<(), CliError> {
    let abs = |p: &mut PathBuf| -> Result<(), CliError> {
        *p = std::path::absolute(&*p)
            .map_err(|e| CliError::Usage(format!("invalid path {}: {e}", p.display())))?;
        Ok(())
    };
    match command {
        Command::Detect(a) => {
            abs(&mut a.input)?;
            abs(&mut a.out_dir)?;
        }
        Command::Generate(a) => {
            if let Some(p) = &mut a.pattern_file {
                abs(p)?;
            }
            if let Some(p) = &mut a.base_model {
                abs(p)?;
            }
            abs(&mut a.out_dir)?;
        }
        Command::Noise(a) => {
            abs(&mut a.input)?;
            if let Some(p) = &mut a.truth {
                abs(p)?;
            }
            abs(&mut a.out_dir)?;
        }
        Command::Evaluate(a) => {
            a.inputs.iter_mut().try_for_each(abs)?;
            a.truths.iter_mut().try_for_each(abs)?;
            if let Some(p) = &mut a.log_dir {
                abs(p)?;
            }
            abs(&mut a.out_dir)?;
        }
        Command::Replay(a) => abs(&mut a.manifest)?,
    }
    Ok(())
}

fn detect_cmd(a: &mut DetectArgs) -> Result<Outcome, CliError> {
    a.detector.config()?;
    let log = load_log(&a.input, &a.format)?;
    if a.detector.ordering.is_none() {
        let timed = log.traces.iter().flat_map(|t| &t.events).all(|e| e.timestamp.is_some());
        if !timed {
            eprintln!("note: some events have no timestamp; streaming in trace order");
        }
        a.detector.ordering = Some(if timed { Ordering::Timestamp } else { Ordering::TraceMajor });
    }
    let config = a.detector.config()?;
    let report = detect(&log, &config)?;
    ensure_dir(&a.out_dir)?;
    let json = a.out_dir.join(REPORT_JSON);
    let csv = a.out_dir.join(REPORT_CSV);
    write_report_json(&report, create(&json)?)?;
    write_report_csv(&report, create(&csv)?)?;
    print_report(&report).map_err(internal)?;
    Ok(Outcome {
        seed: None,
        inputs: vec![a.input.clone()],
        outputs: vec![json, csv],
        mean_ms_per_event: Some(report.stats.mean_ms_per_event),
    })
}

fn print_report(report: &DriftReport) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "drift points: {}", report.points.len())?;
    if !report.points.is_empty() {
        writeln!(out, "{:>12} {:>12}  {:<24}  direction", "event_index", "trace_index", "timestamp")?;
    }
    for p in &report.points {
        let ts = p.timestamp.map(|t| t.to_rfc3339()).unwrap_or_else(|| "-".into());
        writeln!(out, "{:>12} {:>12}  {:<24}  {}", p.event_index, p.trace_index, ts, p.direction.as_str())?;
    }
    writeln!(
        out,
        "events: {}, mean time per event: {:.4} ms",
        report.stats.events, report.stats.mean_ms_per_event
    )
}

fn generate_cmd(a: &GenerateArgs) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let base = match &a.base_model {
        Some(p) => {
            inputs.push(p.clone());
            ProcessModel::from_json(&read_text(p)?)?
        }
        None => base_model(),
    };
    let pattern = match &a.pattern_file {
        Some(p) => {
            inputs.push(p.clone());
            serde_json::from_str::<NamedPattern>(&read_text(p)?)
                .map_err(|e| CliError::Input(format!("invalid pattern file {}: {e}", p.display())))?
        }
        None => lookup_pattern(&a.pattern)?,
    };
    let changed = pattern.apply(&base)?;
    let segments = alternating_segments(&base, &changed, &pattern.name, a.segments);
    let (log, truth) = generate_drift_log(&segments, a.traces_per_segment, a.seed)?;
    let name = a.name.clone().unwrap_or_else(|| pattern.name.clone());
    ensure_dir(&a.out_dir)?;
    let log_path = a.out_dir.join(format!("{name}.{}", a.format.extension()));
    let truth_path = a.out_dir.join(format!("{name}{TRUTH_SUFFIX}"));
    write_log(&log, &log_path, a.format)?;
    write_text(&truth_path, &(truth.to_json() + "\n"))?;
    println!(
        "{}: {} traces, {} events, drifts at traces {:?}",
        log_path.display(),
        log.num_traces(),
        log.num_events(),
        truth.drift_trace_indexes
    );
    Ok(Outcome {
        seed: Some(a.seed),
        inputs,
        outputs: vec![log_path, truth_path],
        mean_ms_per_event: None,
    })
}

fn noise_cmd(a: &NoiseArgs) -> Result<Outcome, CliError> {
    let log = load_log(&a.input, &a.format)?;
    let noisy = inject_noise_with(&log, a.add, a.remove, a.mode, a.seed)?;
    let format = a.format.format_for(&a.input);
    let name = a.name.clone().unwrap_or_else(|| format!("{}_noisy", stem(&a.input)));
    ensure_dir(&a.out_dir)?;
    let log_path = a.out_dir.join(format!("{name}.{}", format.extension()));
    write_log(&noisy, &log_path, format)?;
    let mut inputs = vec![a.input.clone()];
    let mut outputs = vec![log_path.clone()];
    if let Some(t) = &a.truth {
        let text = read_text(t)?;
        GroundTruth::from_json(&text)?
            .validate(noisy.num_traces())
            .map_err(|e| CliError::Input(format!("{}: {e}", t.display())))?;
        let truth_path = a.out_dir.join(format!("{name}{TRUTH_SUFFIX}"));
        write_text(&truth_path, &text)?;
        inputs.push(t.clone());
        outputs.push(truth_path);
    }
    println!(
        "{}: {} events (was {})",
        log_path.display(),
        noisy.num_events(),
        log.num_events()
    );
    Ok(Outcome {
        seed: Some(a.seed),
        inputs,
        outputs,
        mean_ms_per_event: None,
    })
}

fn evaluate_cmd(a: &mut EvaluateArgs) -> Result<Outcome, CliError> {
    a.detector.ordering.get_or_insert(Ordering::TraceMajor);
    let config = a.detector.config()?;
    let pairs = log_pairs(a)?;
    if !pairs.is_empty() && !a.patterns.is_empty() {
        return Err(CliError::Usage(
            "evaluate either logs on disk or generated patterns, not both".into(),
        ));
    }
    let mut outcome = Outcome::default();
    let records: Vec<RunRecord> = if !a.patterns.is_empty() {
        let mut patterns = Vec::new();
        for name in &a.patterns {
            if name == "all" {
                patterns.extend(standard_patterns());
            } else {
                patterns.push(lookup_pattern(name)?);
            }
        }
        let mut experiment = ExperimentConfig::new(patterns, (a.seed..a.seed + a.seeds).collect(), config);
        experiment.noise = a.noise;
        experiment.noise_mode = a.noise_mode;
        experiment.segments = a.segments;
        experiment.traces_per_segment = a.traces_per_segment;
        experiment.ets = a.ets.clone();
        experiment.threads = a.threads;
        outcome.seed = Some(a.seed);
        run_experiment(&experiment)?
    } else if pairs.is_empty() {
        return Err(CliError::Usage(
            "no logs to evaluate: give --input/--truth pairs, a --log-dir or --pattern".into(),
        ));
    } else {
        let mut records = Vec::with_capacity(pairs.len());
        for (name, log_path, truth_path) in pairs {
            let log = load_log(&log_path, &a.format)?;
            let truth = GroundTruth::from_json(&read_text(&truth_path)?)?;
            truth
                .validate(log.num_traces())
                .map_err(|e| CliError::Input(format!("{}: {e}", truth_path.display())))?;
            records.push(evaluate_log(&name, &log, &truth, &config, &a.ets)?);
            outcome.inputs.extend([log_path, truth_path]);
        }
        records
    };
    ensure_dir(&a.out_dir)?;
    let results = a.out_dir.join(RESULTS_CSV);
    write_results_csv(&records, &a.ets, create(&results)?)?;
    for s in summarize(&records, &a.ets) {
        println!(
            "{:<24} et={:<4} runs={:<3} precision={:.3} recall={:.3} f_score={:.3} tp={} fp={} fn={}",
            s.name, s.et, s.runs, s.precision, s.recall, s.f_score, s.tp, s.fp, s.fn_
        );
    }
    outcome.outputs.push(results);
    outcome.mean_ms_per_event =
        Some(records.iter().map(|r| r.mean_ms_per_event).sum::<f64>() / records.len() as f64);
    Ok(outcome)
}

/// `(name, log, truth)` triples from `--input/--truth` and `--log-dir`.
fn log_pairs(a: &EvaluateArgs) -> Result<Vec<(String, PathBuf, PathBuf)>, CliError> {
    if a.inputs.len() != a.truths.len() {
        return Err(CliError::Usage(format!(
            "{} --input but {} --truth given; they pair up by position",
            a.inputs.len(),
            a.truths.len()
        )));
    }
    let mut pairs: Vec<_> = a
        .inputs
        .iter()
        .zip(&a.truths)
        .map(|(l, t)| (stem(l), l.clone(), t.clone()))
        .collect();
    if let Some(dir) = &a.log_dir {
        let entries = fs::read_dir(dir)
            .map_err(|e| CliError::Input(format!("cannot list {}: {e}", dir.display())))?;
        let mut logs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("xes") || e.eq_ignore_ascii_case("csv"))
            })
            .collect();
        logs.sort();
        let before = pairs.len();
        for log in logs {
            let name = stem(&log);
            let truth = dir.join(format!("{name}{TRUTH_SUFFIX}"));
            if truth.is_file() {
                pairs.push((name, log, truth));
            }
        }
        if pairs.len() == before {
            return Err(CliError::Usage(format!(
                "{} holds no log with a matching `<name>{TRUTH_SUFFIX}`",
                dir.display()
            )));
        }
    }
    Ok(pairs)
}

fn lookup_pattern(name: &str) -> Result<NamedPattern, CliError> {
    standard_pattern(name).ok_or_else(|| {
        let known: Vec<String> = standard_patterns().into_iter().map(|p| p.name).collect();
        CliError::Usage(format!("unknown pattern `{name}`; known: {}", known.join(", ")))
    })
}

fn load_log(path: &Path, format: &FormatArgs) -> Result<EventLog, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let log = match format.format_for(path) {
        LogFormat::Xes => parse_xes(&bytes),
        LogFormat::Csv => parse_csv(&bytes, &format.mapping()),
    }
    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    log.validate()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(log)
}

fn write_log(log: &EventLog, path: &Path, format: LogFormat) -> Result<(), CliError> {
    let out = create(path)?;
    match format {
        LogFormat::Xes => write_xes(log, out)?,
        LogFormat::Csv => write_csv(log, out)?,
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "log".into())
}

fn internal(e: io::Error) -> CliError {
    CliError::Internal(e.to_string())
}
