//! Command-line front end: `detect`, `generate`, `noise`, `evaluate` and
//! `replay`.
//!
//! Every run writes a `manifest.json` next to its outputs. The manifest holds
//! the fully resolved command, so `replay` reproduces the outputs of the
//! original run.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 internal error.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::error::Error;
use crate::event_model::{ColumnMapping, Ordering};
use crate::stats::{DEFAULT_ASR_THRESHOLD, DEFAULT_P_THRESHOLD};
use crate::synthlab::NoiseMode;

pub use self::manifest::{RunManifest, MANIFEST_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dfdrift", version, about = "Detect process drifts in event logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Detect drift points in one event log.
    Detect(DetectArgs),
    /// Generate a drifted synthetic log and its ground truth.
    Generate(GenerateArgs),
    /// Add and remove random events.
    Noise(NoiseArgs),
    /// Score detection over generated suites or (log, truth) pairs.
    Evaluate(EvaluateArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogFormat {
    Xes,
    Csv,
}

impl LogFormat {
    /// `.csv` files are CSV, anything else XES.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Xes,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            LogFormat::Xes => "xes",
            LogFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FormatArgs {
    /// Log format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<LogFormat>,
    /// CSV column holding the case id.
    #[arg(long, default_value = "case_id")]
    pub case_column: String,
    /// CSV column holding the activity label.
    #[arg(long, default_value = "activity")]
    pub activity_column: String,
    /// CSV column holding the timestamp.
    #[arg(long, default_value = "timestamp")]
    pub timestamp_column: String,
}

impl FormatArgs {
    pub fn format_for(&self, path: &Path) -> LogFormat {
        self.format.unwrap_or_else(|| LogFormat::infer(path))
    }

    pub fn mapping(&self) -> ColumnMapping {
        ColumnMapping {
            trace_id: self.case_column.clone(),
            activity: self.activity_column.clone(),
            timestamp: Some(self.timestamp_column.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetectorArgs {
    /// Window size in events.
    #[arg(long)]
    pub window: usize,
    /// Consecutive tests on each side of a candidate; defaults to window / 2.
    #[arg(long)]
    pub consecutive_tests: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
    pub p_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_ASR_THRESHOLD)]
    pub asr_threshold: f64,
    /// How traces are flattened into a stream. `detect` defaults to
    /// timestamp order when every event is timestamped, `evaluate` to trace
    /// order.
    #[arg(long, value_enum)]
    pub ordering: Option<Ordering>,
}

impl DetectorArgs {
    /// The validated configuration; an unset ordering reads as trace order.
    pub fn config(&self) -> Result<DetectorConfig, CliError> {
        let mut config = DetectorConfig::new(self.window)
            .with_p_threshold(self.p_threshold)
            .with_asr_threshold(self.asr_threshold)
            .with_ordering(self.ordering.unwrap_or(Ordering::TraceMajor));
        if let Some(c) = self.consecutive_tests {
            config = config.with_consecutive_tests(c);
        }
        config.validate().map_err(CliError::from_core)?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub format: FormatArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// Built-in change pattern applied to every other segment.
    #[arg(long, default_value = "serial_insert", conflicts_with = "pattern_file")]
    pub pattern: String,
    /// JSON file with a custom (possibly composite) change pattern.
    #[arg(long)]
    pub pattern_file: Option<PathBuf>,
    /// JSON file with a custom base process model.
    #[arg(long)]
    pub base_model: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    #[arg(long, default_value_t = 100)]
    pub traces_per_segment: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output log format.
    #[arg(long, value_enum, default_value_t = LogFormat::Xes)]
    pub format: LogFormat,
    /// Stem of the output files; defaults to the pattern name.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub format: FormatArgs,
    /// Ground truth copied unchanged next to the noisy log.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Fraction of events added.
    #[arg(long, default_value_t = 0.1)]
    pub add: f64,
    /// Fraction of events removed.
    #[arg(long, default_value_t = 0.1)]
    pub remove: f64,
    #[arg(long, value_enum, default_value_t = NoiseMode::Alphabet)]
    pub mode: NoiseMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stem of the output files; defaults to `<input stem>_noisy`.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Log to evaluate; pair each with a `--truth`.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    /// Ground-truth JSON for the `--input` at the same position.
    #[arg(long = "truth")]
    pub truths: Vec<PathBuf>,
    /// Directory of `<name>.xes|csv` logs with `<name>.truth.json` beside them.
    #[arg(long)]
    pub log_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub format: FormatArgs,
    /// Built-in pattern to generate suite logs for; `all` selects every one.
    #[arg(long = "pattern")]
    pub patterns: Vec<String>,
    /// Suite logs per pattern.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First suite seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of events both added and removed in suite logs.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_enum, default_value_t = NoiseMode::Alphabet)]
    pub noise_mode: NoiseMode,
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    #[arg(long, default_value_t = 100)]
    pub traces_per_segment: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorArgs,
    /// Error tolerance in traces.
    #[arg(long = "et", default_values_t = [10, 50])]
    pub ets: Vec<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn from_core(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Config(_)
            | Error::Model(_)
            | Error::Pattern(_)
            | Error::UndetectablePattern
            | Error::NoiseFraction(_) => CliError::Usage(message),
            Error::Xes { .. }
            | Error::MissingActivity { .. }
            | Error::MissingTraceId { .. }
            | Error::DuplicateTrace(_)
            | Error::MissingColumn(_)
            | Error::CsvRow { .. }
            | Error::Csv(_)
            | Error::MissingTimestamp { .. }
            | Error::StreamTooShort { .. }
            | Error::Json(_) => CliError::Input(message),
            _ => CliError::Internal(message),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::from_core(e)
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Replay(args) => commands::replay(&args),
        other => commands::run_recorded(other),
    }
}
