use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvalError, GoldRecord};
use crate::detector::ErrorClass;
use crate::editops::EditType;
use crate::pipeline::SentenceReport;

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    /// Precision and recall are 0 when their denominator is 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    NonWordDetection,
    NonWordCorrection,
    RealWordDetection,
    RealWordCorrection,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::NonWordDetection,
        Task::NonWordCorrection,
        Task::RealWordDetection,
        Task::RealWordCorrection,
    ];

    pub fn class(self) -> ErrorClass {
        match self {
            Task::NonWordDetection | Task::NonWordCorrection => ErrorClass::NonWord,
            Task::RealWordDetection | Task::RealWordCorrection => ErrorClass::RealWord,
        }
    }

    pub fn is_correction(self) -> bool {
        matches!(self, Task::NonWordCorrection | Task::RealWordCorrection)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::NonWordDetection => "NonWordDetection",
            Task::NonWordCorrection => "NonWordCorrection",
            Task::RealWordDetection => "RealWordDetection",
            Task::RealWordCorrection => "RealWordCorrection",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    /// Accepts `NonWordCorrection` or `non-word-correction` style names.
    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Task::ALL
            .into_iter()
            .find(|t| t.as_str().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown task {s:?}; expected one of NonWordDetection, NonWordCorrection, RealWordDetection, RealWordCorrection"))
    }
}

/// System output for one sentence: the detected position and, if the
/// system proposed one, its replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub sentence_id: usize,
    pub token_index: usize,
    pub error_class: ErrorClass,
    pub replacement: Option<String>,
}

impl Prediction {
    pub fn from_report(r: &SentenceReport) -> Option<Self> {
        let d = r.detections.first()?;
        let replacement = r
            .corrections
            .iter()
            .find(|c| c.token_index == d.token_index)
            .and_then(|c| c.suggested.clone());
        Some(Self {
            sentence_id: r.sentence_id,
            token_index: d.token_index,
            error_class: d.error_class,
            replacement,
        })
    }
}

#[derive(Deserialize)]
struct LineDetection {
    token_index: usize,
    error_class: ErrorClass,
}

#[derive(Deserialize)]
struct LineCorrection {
    token_index: usize,
    #[serde(default)]
    suggested: Option<String>,
}

#[derive(Deserialize)]
struct PredictionLine {
    sentence_id: usize,
    #[serde(default)]
    detection: Option<LineDetection>,
    #[serde(default)]
    detections: Vec<LineDetection>,
    #[serde(default)]
    corrections: Vec<LineCorrection>,
}

/// Read sentence reports (one JSON object per line, as written by
/// `spellkit correct --per-line` or `spellkit check --per-line`).
/// Sentences without detections yield no prediction.
pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<Prediction>, EvalError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if !seen.insert(p.sentence_id) {
            return Err(EvalError::DuplicateSentence(p.sentence_id));
        }
        if let Some(d) = p.detections.first().or(p.detection.as_ref()) {
            let replacement = p
                .corrections
                .iter()
                .find(|c| c.token_index == d.token_index)
                .and_then(|c| c.suggested.clone());
            out.push(Prediction {
                sentence_id: p.sentence_id,
                token_index: d.token_index,
                error_class: d.error_class,
                replacement,
            });
        }
    }
    Ok(out)
}

/// Score predictions against gold for one task. Detection requires the
/// position to match; correction additionally requires the replacement to
/// equal the gold original. When `subset` is given, only sentences whose
/// gold error has that edit type are considered.
pub fn evaluate_subset(
    predictions: &[Prediction],
    gold: &[GoldRecord],
    task: Task,
    subset: Option<EditType>,
) -> Result<Metrics, EvalError> {
    let class = task.class();
    let mut gold_by_id: HashMap<usize, &GoldRecord> = HashMap::with_capacity(gold.len());
    for g in gold {
        if gold_by_id.insert(g.sentence_id, g).is_some() {
            return Err(EvalError::DuplicateSentence(g.sentence_id));
        }
    }
    let mut pred_ids = HashSet::with_capacity(predictions.len());
    for p in predictions {
        if !pred_ids.insert(p.sentence_id) {
            return Err(EvalError::DuplicateSentence(p.sentence_id));
        }
    }
    let in_scope =
        |id: usize| subset.is_none_or(|t| gold_by_id.get(&id).is_some_and(|g| g.edit_type == t));

    let (mut tp, mut fp) = (0u64, 0u64);
    let mut matched = HashSet::new();
    for p in predictions {
        if p.error_class != class || !in_scope(p.sentence_id) {
            continue;
        }
        if task.is_correction() && p.replacement.is_none() {
            continue;
        }
        let hit = gold_by_id.get(&p.sentence_id).is_some_and(|g| {
            g.error_class == class
                && g.token_index == p.token_index
                && (!task.is_correction() || p.replacement.as_deref() == Some(g.original.as_str()))
        });
        if hit {
            tp += 1;
            matched.insert(p.sentence_id);
        } else {
            fp += 1;
        }
    }
    let fn_ = gold
        .iter()
        .filter(|g| {
            g.error_class == class && in_scope(g.sentence_id) && !matched.contains(&g.sentence_id)
        })
        .count() as u64;
    Ok(Metrics::from_counts(tp, fp, fn_))
}

pub fn evaluate(
    predictions: &[Prediction],
    gold: &[GoldRecord],
    task: Task,
) -> Result<Metrics, EvalError> {
    evaluate_subset(predictions, gold, task, None)
}
