//! Candidate ranking and replacement selection.
//!
//! Candidates are ordered by contextual score and cut to the top `k`. The
//! PERTO gate then keeps substitution-type candidates whose orthographic
//! code equals the error's; if any survive, the best of them wins.
//! Otherwise (no survivor, or no substitution candidates at all) the
//! highest contextual score wins. Ties go to the smaller edit distance, then
//! to the lexicographically smaller word.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{score_position, DetectError, Detection, DetectorConfig, ErrorClass};
use crate::editops::{Candidate, CandidateIndex, EditError, EditType};
use crate::normalizer::Sentence;
use crate::perto::PertoTable;
use crate::scorer::{ContextScorer, ScoreDistribution, ScoreError};

#[derive(Debug, Error)]
pub enum CorrectError {
    #[error("no lexicon candidate within reach of {word:?} at token {token_index}")]
    NoCandidates { token_index: usize, word: String },
    #[error("candidate {0:?} has no contextual score")]
    Unscored(String),
    #[error("detection is {found}, expected {expected}")]
    WrongClass {
        expected: ErrorClass,
        found: ErrorClass,
    },
    #[error("token index {0} is outside the sentence")]
    BadIndex(usize),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Edit(#[from] EditError),
}

impl From<DetectError> for CorrectError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Score(e) => CorrectError::Score(e),
            DetectError::Edit(e) => CorrectError::Edit(e),
        }
    }
}

/// Outcome of ranking: candidates in selection order (the replacement
/// first) and whether the PERTO gate decided the pick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub replacement: String,
    pub ranked_candidates: Vec<Candidate>,
    pub used_perto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub token_index: usize,
    pub error_class: ErrorClass,
    pub original: String,
    pub replacement: String,
    pub ranked_candidates: Vec<Candidate>,
    pub used_perto: bool,
    pub corrected_sentence: String,
}

fn by_score(a: &Candidate, b: &Candidate) -> Ordering {
    b.score()
        .total_cmp(&a.score())
        .then_with(|| a.distance.cmp(&b.distance))
        .then_with(|| a.word.cmp(&b.word))
}

/// Rank scored candidates for `error_word` and pick the replacement.
///
/// `must_outscore`, when set, restricts selection to candidates scoring
/// strictly above it (used for real-word errors, where the original word has
/// a meaningful score).
pub fn rank_and_select(
    error_word: &str,
    scored: &ScoreDistribution,
    candidates: &[Candidate],
    cfg: &DetectorConfig,
    table: &PertoTable,
    must_outscore: Option<f64>,
) -> Result<Ranking, CorrectError> {
    if candidates.is_empty() {
        return Err(CorrectError::NoCandidates {
            token_index: 0,
            word: error_word.to_string(),
        });
    }
    let mut pool = candidates
        .iter()
        .map(|c| {
            let score = scored
                .get(&c.word)
                .ok_or_else(|| CorrectError::Unscored(c.word.clone()))?;
            let mut c = c.clone();
            c.contextual_score = Some(score);
            c.perto_match = Some(table.matches(&c.word, error_word));
            Ok(c)
        })
        .collect::<Result<Vec<_>, CorrectError>>()?;
    pool.sort_by(by_score);
    pool.truncate(cfg.top_k.max(1));

    let eligible = |c: &Candidate| must_outscore.is_none_or(|floor| c.score() > floor);
    let gated = |c: &Candidate| {
        cfg.perto
            && eligible(c)
            && c.edit_type == EditType::Substitution
            && c.perto_match == Some(true)
    };

    let used_perto = pool.iter().any(gated);
    // Stable partition: preferred group first, each group in score order.
    let (mut first, rest): (Vec<Candidate>, Vec<Candidate>) = if used_perto {
        pool.into_iter().partition(|c| gated(c))
    } else {
        let (mut e, r): (Vec<_>, Vec<_>) = pool.into_iter().partition(|c| eligible(c));
        if e.is_empty() {
            // Nothing clears the floor; fall back to plain contextual order.
            e = r;
            (e, Vec::new())
        } else {
            (e, r)
        }
    };
    first.extend(rest);
    Ok(Ranking {
        replacement: first[0].word.clone(),
        ranked_candidates: first,
        used_perto,
    })
}

fn token_word(sentence: &Sentence, index: usize) -> Result<&str, CorrectError> {
    sentence
        .tokens
        .get(index)
        .map(|t| t.surface.as_str())
        .ok_or(CorrectError::BadIndex(index))
}

fn finish(
    sentence: &Sentence,
    detection: &Detection,
    original: &str,
    ranking: Ranking,
) -> Correction {
    Correction {
        token_index: detection.token_index,
        error_class: detection.error_class,
        original: original.to_string(),
        corrected_sentence: sentence.with_replacement(detection.token_index, &ranking.replacement),
        replacement: ranking.replacement,
        ranked_candidates: ranking.ranked_candidates,
        used_perto: ranking.used_perto,
    }
}

/// Correct a non-word error: generate neighbors, score them in context and
/// rank. The error word's own score plays no part in selection.
pub fn correct_nonword(
    sentence: &Sentence,
    detection: &Detection,
    index: &CandidateIndex,
    scorer: &dyn ContextScorer,
    cfg: &DetectorConfig,
    table: &PertoTable,
) -> Result<Correction, CorrectError> {
    if detection.error_class != ErrorClass::NonWord {
        return Err(CorrectError::WrongClass {
            expected: ErrorClass::NonWord,
            found: detection.error_class,
        });
    }
    let word = token_word(sentence, detection.token_index)?;
    let candidates = index.candidates(word, cfg.max_dist)?;
    let no_candidates = || CorrectError::NoCandidates {
        token_index: detection.token_index,
        word: word.to_string(),
    };
    let scored = score_position(sentence, detection.token_index, candidates, scorer)?
        .ok_or_else(no_candidates)?;
    let ranking = rank_and_select(word, &scored.scores, &scored.candidates, cfg, table, None)?;
    Ok(finish(sentence, detection, word, ranking))
}

/// Correct a real-word error, reusing the scores from detection when
/// present. Only candidates that outscore the original are selectable.
pub fn correct_realword(
    sentence: &Sentence,
    detection: &Detection,
    index: &CandidateIndex,
    scorer: &dyn ContextScorer,
    cfg: &DetectorConfig,
    table: &PertoTable,
) -> Result<Correction, CorrectError> {
    if detection.error_class != ErrorClass::RealWord {
        return Err(CorrectError::WrongClass {
            expected: ErrorClass::RealWord,
            found: detection.error_class,
        });
    }
    let word = token_word(sentence, detection.token_index)?;
    let scored = match &detection.scored {
        Some(s) => s.clone(),
        None => {
            let candidates = index.candidates(word, cfg.max_dist)?;
            score_position(sentence, detection.token_index, candidates, scorer)?.ok_or_else(
                || CorrectError::NoCandidates {
                    token_index: detection.token_index,
                    word: word.to_string(),
                },
            )?
        }
    };
    let original_score = scored.scores.get(word).unwrap_or(0.0);
    let ranking = rank_and_select(
        word,
        &scored.scores,
        &scored.candidates,
        cfg,
        table,
        Some(original_score),
    )?;
    Ok(finish(sentence, detection, word, ranking))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::detect_realword;
    use crate::lexicon::Lexicon;
    use crate::scorer::FixedScorer;
    use std::collections::HashMap;

    fn dist(pairs: &[(&str, f64)]) -> ScoreDistribution {
        let words: Vec<String> = pairs.iter().map(|(w, _)| w.to_string()).collect();
        let raw: HashMap<String, f64> = pairs.iter().map(|(w, s)| (w.to_string(), *s)).collect();
        ScoreDistribution::from_raw(&words, &raw).unwrap()
    }

    fn cand(w: &str, d: usize, t: EditType) -> Candidate {
        Candidate::new(w, d, t)
    }

    #[test]
    fn table_four_selection() {
        let scores = dist(&[("اینتراداکتال", 0.630), ("اینترارکتال", 0.034)]);
        let cands = [cand("اینتراداکتال", 2, EditType::Mixed)];
        let r = rank_and_select(
            "اینترارکتال",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &PertoTable::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.replacement, "اینتراداکتال");
        assert!(!r.used_perto);
    }

    /// Error "کبک": "کمک" scores higher but م has its own code; "گبک"
    /// shares the error's code (ک and گ are one group), so the gate keeps
    /// only it.
    #[test]
    fn gate_prefers_lower_scored_look_alike() {
        let table = PertoTable::default();
        let scores = dist(&[("کبک", 0.1), ("کمک", 0.6), ("گبک", 0.3)]);
        let cands = [
            cand("کمک", 1, EditType::Substitution),
            cand("گبک", 1, EditType::Substitution),
        ];
        let r = rank_and_select(
            "کبک",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &table,
            None,
        )
        .unwrap();
        assert_eq!(r.replacement, "گبک");
        assert!(r.used_perto);
        assert_eq!(r.ranked_candidates[0].word, "گبک");
        assert_eq!(r.ranked_candidates[1].word, "کمک");
        assert_eq!(r.ranked_candidates[1].perto_match, Some(false));

        let off = DetectorConfig {
            perto: false,
            ..DetectorConfig::default()
        };
        let r = rank_and_select("کبک", &scores, &cands, &off, &table, None).unwrap();
        assert_eq!(r.replacement, "کمک");
    }

    #[test]
    fn empty_gate_falls_back_to_context() {
        let scores = dist(&[("کبک", 0.1), ("کمک", 0.6), ("کبکی", 0.3)]);
        let cands = [
            cand("کمک", 1, EditType::Substitution),
            cand("کبکی", 1, EditType::Deletion),
        ];
        let r = rank_and_select(
            "کبک",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &PertoTable::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.replacement, "کمک");
        assert!(!r.used_perto);
    }

    #[test]
    fn transposition_match_does_not_gate() {
        // "کگ" -> "گک" has equal codes but is a transposition.
        let scores = dist(&[("کگم", 0.2), ("گکم", 0.3), ("کگو", 0.5)]);
        let cands = [
            cand("گکم", 1, EditType::Transposition),
            cand("کگو", 1, EditType::Substitution),
        ];
        let r = rank_and_select(
            "کگم",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &PertoTable::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.replacement, "کگو");
        assert!(!r.used_perto);
    }

    #[test]
    fn single_candidate_wins_regardless() {
        let scores = dist(&[("abc", 0.9), ("abd", 0.1)]);
        let cands = [cand("abd", 1, EditType::Substitution)];
        let r = rank_and_select(
            "abc",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &PertoTable::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.replacement, "abd");
    }

    #[test]
    fn ties_prefer_distance_then_spelling() {
        let scores = dist(&[("x", 0.0), ("bb", 0.5), ("aa", 0.5), ("ab", 0.5)]);
        let cands = [
            cand("bb", 2, EditType::Substitution),
            cand("aa", 2, EditType::Substitution),
            cand("ab", 1, EditType::Substitution),
        ];
        let cfg = DetectorConfig {
            perto: false,
            ..DetectorConfig::default()
        };
        let r = rank_and_select("x", &scores, &cands, &cfg, &PertoTable::default(), None).unwrap();
        let order: Vec<_> = r
            .ranked_candidates
            .iter()
            .map(|c| c.word.as_str())
            .collect();
        assert_eq!(order, vec!["ab", "aa", "bb"]);
    }

    #[test]
    fn top_k_truncates() {
        let pairs: Vec<(String, f64)> = (0..15).map(|i| (format!("w{i:02}"), i as f64)).collect();
        let words: Vec<String> = pairs.iter().map(|p| p.0.clone()).collect();
        let raw: HashMap<String, f64> = pairs.iter().cloned().collect();
        let scores = ScoreDistribution::from_raw(&words, &raw).unwrap();
        let cands: Vec<Candidate> = words
            .iter()
            .map(|w| cand(w, 1, EditType::Insertion))
            .collect();
        let r = rank_and_select(
            "w",
            &scores,
            &cands,
            &DetectorConfig::default(),
            &PertoTable::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.ranked_candidates.len(), 10);
        assert_eq!(r.replacement, "w14");
    }

    #[test]
    fn empty_candidates_is_an_error() {
        let scores = dist(&[("x", 1.0)]);
        assert!(matches!(
            rank_and_select(
                "x",
                &scores,
                &[],
                &DetectorConfig::default(),
                &PertoTable::default(),
                None
            ),
            Err(CorrectError::NoCandidates { .. })
        ));
    }

    #[test]
    fn unscored_candidate_is_an_error() {
        let scores = dist(&[("x", 1.0)]);
        let cands = [cand("y", 1, EditType::Substitution)];
        assert!(matches!(
            rank_and_select(
                "x",
                &scores,
                &cands,
                &DetectorConfig::default(),
                &PertoTable::default(),
                None
            ),
            Err(CorrectError::Unscored(_))
        ));
    }

    #[test]
    fn realword_table_four_rewrites_sentence() {
        let lex = Lexicon::from_words(
            "t",
            [
                "در",
                "سمت",
                "چپ",
                "توده",
                "اینترارکتال",
                "اینتراداکتال",
                "دیده",
                "شد",
            ],
        );
        let idx = CandidateIndex::build(&lex, 2).unwrap();
        let s = Sentence::from_text("در سمت چپ توده اینترارکتال دیده شد").unwrap();
        let scorer = FixedScorer::new([("اینتراداکتال", 0.630), ("اینترارکتال", 0.034)], 0.0);
        let cfg = DetectorConfig::default();
        let table = PertoTable::default();
        let d = detect_realword(&s, &idx, &scorer, &cfg).unwrap().unwrap();
        let c = correct_realword(&s, &d, &idx, &scorer, &cfg, &table).unwrap();
        assert_eq!(c.replacement, "اینتراداکتال");
        assert_eq!(c.corrected_sentence, "در سمت چپ توده اینتراداکتال دیده شد");

        // Without cached scores the scorer is consulted again.
        let mut bare = d.clone();
        bare.scored = None;
        let c2 = correct_realword(&s, &bare, &idx, &scorer, &cfg, &table).unwrap();
        assert_eq!(c2, c);
    }

    #[test]
    fn wrong_class_rejected() {
        let lex = Lexicon::from_words("t", ["الف"]);
        let idx = CandidateIndex::build(&lex, 2).unwrap();
        let s = Sentence::from_text("الف").unwrap();
        let scorer = FixedScorer::default();
        let d = Detection::nonword(0);
        assert!(matches!(
            correct_realword(
                &s,
                &d,
                &idx,
                &scorer,
                &DetectorConfig::default(),
                &PertoTable::default()
            ),
            Err(CorrectError::WrongClass { .. })
        ));
    }

    #[test]
    fn nonword_without_neighbors() {
        let lex = Lexicon::from_words("t", ["الف"]);
        let idx = CandidateIndex::build(&lex, 2).unwrap();
        let s = Sentence::from_text("زززززز").unwrap();
        let err = correct_nonword(
            &s,
            &Detection::nonword(0),
            &idx,
            &FixedScorer::default(),
            &DetectorConfig::default(),
            &PertoTable::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CorrectError::NoCandidates { token_index: 0, .. }
        ));
    }
}
