//! Contextual scoring of candidate words at a masked sentence position.
//!
//! Two backends implement [`ContextScorer`]: the built-in bidirectional
//! four-gram model ([`FourGramModel`]) and an HTTP adapter for an external
//! masked-language-model service ([`RemoteScorer`]). [`FixedScorer`] replays
//! a fixed score table and is meant for fixtures.

mod fourgram;
mod remote;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fourgram::{train_fourgram, FourGramError, FourGramModel, FourGramWeights, BOS, EOS};
pub use remote::{RemoteConfig, RemoteScorer, MASK_TOKEN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("invalid masked query: {0}")]
    InvalidQuery(String),
    #[error("scoring service timed out")]
    Timeout,
    #[error("scoring service unreachable: {0}")]
    Transport(String),
    #[error("scoring service returned HTTP {status}")]
    Status { status: u16, body: String },
    #[error("malformed scoring response: {0}")]
    Malformed(String),
    #[error("scoring response has no score for {0:?}")]
    MissingWord(String),
}

impl ScoreError {
    /// True when the backend could not be reached at all, as opposed to
    /// answering badly.
    pub fn is_unavailable(&self) -> bool {
        matches!(
            self,
            ScoreError::Timeout | ScoreError::Transport(_) | ScoreError::Status { .. }
        )
    }

    pub fn code(&self) -> &'static str {
        match self {
            ScoreError::InvalidQuery(_) => "invalid_query",
            ScoreError::Timeout => "scorer_timeout",
            ScoreError::Transport(_) => "scorer_unreachable",
            ScoreError::Status { .. } => "scorer_status",
            ScoreError::Malformed(_) => "scorer_malformed_response",
            ScoreError::MissingWord(_) => "scorer_missing_word",
        }
    }
}

/// A sentence with one position under evaluation and the words to score
/// there. The word currently at `mask_index` is never consulted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedQuery {
    tokens: Vec<String>,
    mask_index: usize,
    vocabulary: Vec<String>,
}

impl MaskedQuery {
    pub fn new(
        tokens: Vec<String>,
        mask_index: usize,
        vocabulary: Vec<String>,
    ) -> Result<Self, ScoreError> {
        if mask_index >= tokens.len() {
            return Err(ScoreError::InvalidQuery(format!(
                "mask index {mask_index} outside sentence of {} tokens",
                tokens.len()
            )));
        }
        if vocabulary.is_empty() {
            return Err(ScoreError::InvalidQuery("no words to score".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = vocabulary.iter().find(|w| !seen.insert(w.as_str())) {
            return Err(ScoreError::InvalidQuery(format!("duplicate word {dup:?}")));
        }
        Ok(Self {
            tokens,
            mask_index,
            vocabulary,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn mask_index(&self) -> usize {
        self.mask_index
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Tokens left of the mask.
    pub fn left_context(&self) -> &[String] {
        &self.tokens[..self.mask_index]
    }

    /// Tokens right of the mask.
    pub fn right_context(&self) -> &[String] {
        &self.tokens[self.mask_index + 1..]
    }
}

/// Probabilities over exactly the requested words, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    scores: BTreeMap<String, f64>,
}

impl ScoreDistribution {
    /// Renormalize raw non-negative scores over `requested`. A word missing
    /// from `raw` is an error; extra words in `raw` are ignored. If every
    /// requested word scores zero the distribution is uniform.
    pub fn from_raw(requested: &[String], raw: &HashMap<String, f64>) -> Result<Self, ScoreError> {
        let mut picked = Vec::with_capacity(requested.len());
        for w in requested {
            let v = *raw
                .get(w)
                .ok_or_else(|| ScoreError::MissingWord(w.clone()))?;
            if !v.is_finite() || v < 0.0 {
                return Err(ScoreError::Malformed(format!("score {v} for {w:?}")));
            }
            picked.push((w.clone(), v));
        }
        Ok(Self::normalized(picked))
    }

    fn normalized(picked: Vec<(String, f64)>) -> Self {
        let total: f64 = picked.iter().map(|(_, v)| v).sum();
        let n = picked.len() as f64;
        let scores = picked
            .into_iter()
            .map(|(w, v)| {
                let p = if total > 0.0 { v / total } else { 1.0 / n };
                (w, p)
            })
            .collect();
        Self { scores }
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(w, &p)| (w.as_str(), p))
    }

    pub fn total(&self) -> f64 {
        self.scores.values().sum()
    }
}

pub trait ContextScorer: Send + Sync {
    fn score(&self, query: &MaskedQuery) -> Result<ScoreDistribution, ScoreError>;

    /// Short backend name for status reporting.
    fn backend(&self) -> &'static str;

    fn health(&self) -> Result<(), ScoreError> {
        Ok(())
    }
}

/// Scores from a fixed table, ignoring context. Words not in the table get
/// `default_score`.
#[derive(Debug, Clone, Default)]
pub struct FixedScorer {
    table: HashMap<String, f64>,
    default_score: f64,
}

impl FixedScorer {
    pub fn new<I, S>(entries: I, default_score: f64) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self {
            table: entries.into_iter().map(|(w, s)| (w.into(), s)).collect(),
            default_score,
        }
    }
}

impl ContextScorer for FixedScorer {
    fn score(&self, query: &MaskedQuery) -> Result<ScoreDistribution, ScoreError> {
        let raw = query
            .vocabulary()
            .iter()
            .map(|w| {
                (
                    w.clone(),
                    self.table.get(w).copied().unwrap_or(self.default_score),
                )
            })
            .collect();
        ScoreDistribution::from_raw(query.vocabulary(), &raw)
    }

    fn backend(&self) -> &'static str {
        "fixed"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn query_invariants() {
        assert!(MaskedQuery::new(words(&["a"]), 1, words(&["x"])).is_err());
        assert!(MaskedQuery::new(words(&["a"]), 0, vec![]).is_err());
        assert!(MaskedQuery::new(words(&["a"]), 0, words(&["x", "x"])).is_err());
        let q = MaskedQuery::new(words(&["a", "b", "c"]), 1, words(&["x"])).unwrap();
        assert_eq!(q.left_context(), &words(&["a"])[..]);
        assert_eq!(q.right_context(), &words(&["c"])[..]);
    }

    #[test]
    fn singleton_scores_one() {
        let s = FixedScorer::new([("x", 0.2)], 0.0);
        let q = MaskedQuery::new(words(&["a"]), 0, words(&["x"])).unwrap();
        assert_eq!(s.score(&q).unwrap().get("x"), Some(1.0));
    }

    #[test]
    fn table_four_replay_ranks_intraductal_first() {
        let s = FixedScorer::new([("اینتراداکتال", 0.630), ("اینترارکتال", 0.034)], 0.0);
        let q = MaskedQuery::new(
            words(&["توده", "اینترارکتال"]),
            1,
            words(&["اینترارکتال", "اینتراداکتال"]),
        )
        .unwrap();
        let d = s.score(&q).unwrap();
        assert!(d.get("اینتراداکتال").unwrap() > d.get("اینترارکتال").unwrap());
        assert!((d.get("اینتراداکتال").unwrap() - 0.630 / 0.664).abs() < 1e-12);
    }

    #[test]
    fn missing_and_bad_scores() {
        let raw: HashMap<String, f64> = [("a".to_string(), 1.0)].into();
        assert_eq!(
            ScoreDistribution::from_raw(&words(&["a", "b"]), &raw),
            Err(ScoreError::MissingWord("b".into()))
        );
        let raw: HashMap<String, f64> = [("a".to_string(), -1.0)].into();
        assert!(matches!(
            ScoreDistribution::from_raw(&words(&["a"]), &raw),
            Err(ScoreError::Malformed(_))
        ));
    }

    #[test]
    fn all_zero_is_uniform() {
        let raw: HashMap<String, f64> = [("a".to_string(), 0.0), ("b".to_string(), 0.0)].into();
        let d = ScoreDistribution::from_raw(&words(&["a", "b"]), &raw).unwrap();
        assert_eq!(d.get("a"), Some(0.5));
    }
}
