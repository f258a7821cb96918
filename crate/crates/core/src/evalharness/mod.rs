//! Synthetic error injection and precision/recall/F1 evaluation.
//!
//! Injection draws, per sentence, whether to inject a non-word or real-word
//! error, then the edit type and distance from the spec's proportions. The
//! generator is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`, so a
//! corrupted corpus is reproducible across platforms.

mod desk;
mod inject;
mod metrics;
mod report;
mod spec;
mod synth;

use thiserror::Error;

pub use desk::{check_lines, run_desk_benchmark, DeskConfig, DeskResult};
pub use inject::{inject_errors, read_gold, write_gold, GoldRecord, InjectionOutcome, Injector};
pub use metrics::{
    evaluate, evaluate_subset, f1_score, read_predictions, Metrics, Prediction, Task,
};
pub use report::{report, Configuration, Entry, Report, ReportRow};
pub use spec::{DistanceMix, InjectionSpec, PerClass, TypeMix};
pub use synth::{SynthConfig, SyntheticCorpus};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid injection spec: {0}")]
    Spec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate sentence_id {0}")]
    DuplicateSentence(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
