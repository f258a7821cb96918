//! Edit distance, edit classification and lexicon candidate generation.

mod classify;
mod distance;
mod index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{classify_edit, EditType};
pub use distance::{osa_distance, osa_distance_chars};
pub use index::CandidateIndex;

/// Candidates further than this are never generated.
pub const MAX_SUPPORTED_DISTANCE: usize = 2;

#[derive(Debug, Error)]
pub enum EditError {
    #[error("edit distance {0} is not supported (allowed: 1..=2)")]
    UnsupportedDistance(usize),
    #[error("index was built for distance {built}, query asked for {requested}")]
    IndexTooShallow { requested: usize, built: usize },
    #[error("cannot classify an edit at distance {distance} (expected 1 or 2)")]
    ClassifyDistance { distance: usize },
    #[error("index cache: {0}")]
    Cache(String),
}

/// A lexicon word proposed as a replacement. Score and PERTO flag are filled
/// in by the scoring and ranking stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub word: String,
    pub distance: usize,
    pub edit_type: EditType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contextual_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perto_match: Option<bool>,
}

impl Candidate {
    pub fn new(word: impl Into<String>, distance: usize, edit_type: EditType) -> Self {
        Self {
            word: word.into(),
            distance,
            edit_type,
            contextual_score: None,
            perto_match: None,
        }
    }

    pub fn score(&self) -> f64 {
        self.contextual_score.unwrap_or(0.0)
    }
}

/// Candidates for `word` within `max_dist`, via a freshly built index.
/// Prefer building a [`CandidateIndex`] once and querying it.
pub fn generate_candidates(
    word: &str,
    lex: &crate::lexicon::Lexicon,
    max_dist: usize,
) -> Result<Vec<Candidate>, EditError> {
    CandidateIndex::build(lex, max_dist)?.candidates(word, max_dist)
}
