//! Synthetic drifted logs: block-structured models, change patterns, noise
//! and scoring.

mod experiment;
mod generate;
mod model;
mod noise;
mod patterns;
mod score;

pub use self::experiment::{
    evaluate_log, run_experiment, suite_log, summarize, write_results_csv, ExperimentConfig, RunRecord, Summary,
};
pub use self::generate::{alternating_segments, generate_drift_log, GroundTruth, Segment};
pub use self::model::{base_model, df_relations_of, Node, ProcessModel};
pub use self::noise::{inject_noise, inject_noise_with, NoiseMode};
pub use self::patterns::{
    apply_change_pattern, apply_composite, check_standard_patterns, standard_pattern, standard_patterns, Category,
    ChangePattern, NamedPattern, PatternKind, BRANCH_PROBABILITY, LOOP_REPEAT, SKIP_PROBABILITY,
};
pub use self::score::{score, ScoreResult};
