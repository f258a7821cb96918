//! First-error detection within a sentence.
//!
//! Non-word errors are found by lexicon lookup. Real-word errors are found
//! by masking each word in turn and asking the contextual scorer whether
//! some lexicon neighbor fits the position better than the word itself.
//! Both scans run left to right and stop at the first hit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::editops::{Candidate, CandidateIndex, EditError, MAX_SUPPORTED_DISTANCE};
use crate::lexicon::Lexicon;
use crate::normalizer::Sentence;
use crate::scorer::{ContextScorer, MaskedQuery, ScoreDistribution, ScoreError};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Edit(#[from] EditError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorClass {
    NonWord,
    RealWord,
}

impl std::fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorClass::NonWord => "NonWord",
            ErrorClass::RealWord => "RealWord",
        })
    }
}

/// Detection and ranking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub max_dist: usize,
    /// A candidate must score above `margin` times the original's score to
    /// flag a real-word error. 1.0 is a plain strict comparison.
    pub margin: f64,
    /// Candidates kept for ranking after sorting by contextual score.
    pub top_k: usize,
    /// Apply the PERTO gate during ranking.
    pub perto: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            max_dist: 2,
            margin: 1.0,
            top_k: 10,
            perto: true,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=MAX_SUPPORTED_DISTANCE).contains(&self.max_dist) {
            return Err(format!("max_dist must be 1 or 2, got {}", self.max_dist));
        }
        if !(self.margin.is_finite() && self.margin >= 1.0) {
            return Err(format!("margin must be >= 1.0, got {}", self.margin));
        }
        if self.top_k == 0 {
            return Err("top_k must be positive".into());
        }
        Ok(())
    }
}

/// Why a real-word error was flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub candidate: String,
    pub candidate_score: f64,
    pub original_score: f64,
}

/// Scores computed while scanning, kept so correction can reuse them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidates {
    pub candidates: Vec<Candidate>,
    pub scores: ScoreDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub token_index: usize,
    pub error_class: ErrorClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    #[serde(skip)]
    pub scored: Option<ScoredCandidates>,
}

impl Detection {
    pub fn nonword(token_index: usize) -> Self {
        Self {
            token_index,
            error_class: ErrorClass::NonWord,
            evidence: None,
            scored: None,
        }
    }
}

/// First checkable token missing from the lexicon.
pub fn detect_nonword(sentence: &Sentence, lex: &Lexicon) -> Option<Detection> {
    sentence
        .tokens
        .iter()
        .find(|t| t.is_checkable() && !lex.contains(&t.surface))
        .map(|t| Detection::nonword(t.index))
}

/// Score `word` and its lexicon neighbors at position `index`. Returns
/// `None` when the word has no neighbors.
pub(crate) fn score_position(
    sentence: &Sentence,
    index: usize,
    candidates: Vec<Candidate>,
    scorer: &dyn ContextScorer,
) -> Result<Option<ScoredCandidates>, ScoreError> {
    if candidates.is_empty() {
        return Ok(None);
    }
    let word = &sentence.tokens[index].surface;
    let mut vocabulary = Vec::with_capacity(candidates.len() + 1);
    vocabulary.push(word.clone());
    vocabulary.extend(candidates.iter().map(|c| c.word.clone()));
    let query = MaskedQuery::new(sentence.token_surfaces(), index, vocabulary)?;
    let scores = scorer.score(&query)?;
    let candidates = candidates
        .into_iter()
        .map(|mut c| {
            c.contextual_score = scores.get(&c.word);
            c
        })
        .collect();
    Ok(Some(ScoredCandidates { candidates, scores }))
}

/// First lexicon word that some neighbor outscores in context by more than
/// `cfg.margin`. Equal scores are not a detection.
pub fn detect_realword(
    sentence: &Sentence,
    index: &CandidateIndex,
    scorer: &dyn ContextScorer,
    cfg: &DetectorConfig,
) -> Result<Option<Detection>, DetectError> {
    for token in &sentence.tokens {
        if !token.is_checkable() || !index.contains(&token.surface) {
            continue;
        }
        let candidates = index.candidates(&token.surface, cfg.max_dist)?;
        let Some(scored) = score_position(sentence, token.index, candidates, scorer)? else {
            continue;
        };
        let original_score = scored.scores.get(&token.surface).unwrap_or(0.0);
        let threshold = original_score * cfg.margin;
        // Candidates arrive ordered by distance then spelling, so keeping
        // the first maximum applies the tie-break.
        let mut best: Option<&Candidate> = None;
        for c in &scored.candidates {
            if c.score() > threshold && best.is_none_or(|b| c.score() > b.score()) {
                best = Some(c);
            }
        }
        if let Some(best) = best {
            let evidence = Evidence {
                candidate: best.word.clone(),
                candidate_score: best.score(),
                original_score,
            };
            return Ok(Some(Detection {
                token_index: token.index,
                error_class: ErrorClass::RealWord,
                evidence: Some(evidence),
                scored: Some(scored),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::FixedScorer;

    fn sentence(s: &str) -> Sentence {
        Sentence::from_text(s).unwrap()
    }

    fn lex(words: &[&str]) -> Lexicon {
        Lexicon::from_words("t", words.iter().copied())
    }

    const FLUID: &str = "در محل بررسی مایغ مشاهده نشد";

    #[test]
    fn nonword_found() {
        let l = lex(&["در", "محل", "بررسی", "مایع", "مشاهده", "نشد"]);
        let d = detect_nonword(&sentence(FLUID), &l).unwrap();
        assert_eq!(d.token_index, 3);
        assert_eq!(d.error_class, ErrorClass::NonWord);
        assert!(d.evidence.is_none());
    }

    #[test]
    fn all_known_means_none() {
        let l = lex(&["در", "محل", "بررسی", "مایغ", "مشاهده", "نشد"]);
        assert!(detect_nonword(&sentence(FLUID), &l).is_none());
    }

    #[test]
    fn leftmost_reported() {
        let l = lex(&["در", "بررسی", "مایع", "مشاهده", "نشد"]);
        assert_eq!(detect_nonword(&sentence(FLUID), &l).unwrap().token_index, 1);
    }

    #[test]
    fn pass_through_tokens_ignored() {
        let l = lex(&["ضخامت", "است"]);
        assert!(detect_nonword(&sentence("ضخامت 12 mm است"), &l).is_none());
    }

    const MASS: &str = "در سمت چپ توده اینترارکتال دیده شد";

    fn mass_index() -> CandidateIndex {
        let l = lex(&[
            "در",
            "سمت",
            "چپ",
            "توده",
            "اینترارکتال",
            "اینتراداکتال",
            "دیده",
            "شد",
        ]);
        CandidateIndex::build(&l, 2).unwrap()
    }

    #[test]
    fn table_four_realword() {
        let scorer = FixedScorer::new([("اینتراداکتال", 0.630), ("اینترارکتال", 0.034)], 0.0);
        let d = detect_realword(
            &sentence(MASS),
            &mass_index(),
            &scorer,
            &DetectorConfig::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(d.token_index, 4);
        assert_eq!(d.error_class, ErrorClass::RealWord);
        let ev = d.evidence.unwrap();
        assert_eq!(ev.candidate, "اینتراداکتال");
        assert!(ev.candidate_score > ev.original_score);
    }

    #[test]
    fn original_best_everywhere_means_none() {
        let scorer = FixedScorer::new([("اینتراداکتال", 0.034), ("اینترارکتال", 0.630)], 0.0);
        let d = detect_realword(
            &sentence(MASS),
            &mass_index(),
            &scorer,
            &DetectorConfig::default(),
        )
        .unwrap();
        assert!(d.is_none());
    }

    #[test]
    fn tie_is_not_a_detection() {
        let scorer = FixedScorer::new([("اینتراداکتال", 0.5), ("اینترارکتال", 0.5)], 0.0);
        let d = detect_realword(
            &sentence(MASS),
            &mass_index(),
            &scorer,
            &DetectorConfig::default(),
        )
        .unwrap();
        assert!(d.is_none());
    }

    #[test]
    fn margin_suppresses_weak_evidence() {
        let scorer = FixedScorer::new([("اینتراداکتال", 0.6), ("اینترارکتال", 0.4)], 0.0);
        let cfg = DetectorConfig {
            margin: 2.0,
            ..DetectorConfig::default()
        };
        assert!(
            detect_realword(&sentence(MASS), &mass_index(), &scorer, &cfg)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn no_candidates_anywhere() {
        let idx = CandidateIndex::build(&lex(&["الف", "دیده"]), 2).unwrap();
        let scorer = FixedScorer::new([("x", 1.0)], 0.0);
        let d = detect_realword(
            &sentence("الف دیده"),
            &idx,
            &scorer,
            &DetectorConfig::default(),
        )
        .unwrap();
        assert!(d.is_none());
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        let bad = [
            DetectorConfig {
                max_dist: 3,
                ..Default::default()
            },
            DetectorConfig {
                margin: 0.5,
                ..Default::default()
            },
            DetectorConfig {
                top_k: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
