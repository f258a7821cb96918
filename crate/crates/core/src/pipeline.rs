//! End-to-end checking: normalize, segment, tokenize, then per sentence run
//! non-word detection and correction, falling back to real-word detection
//! and correction when every word is in the lexicon.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrector::{correct_nonword, correct_realword, CorrectError, Correction};
use crate::detector::{
    detect_nonword, detect_realword, DetectError, Detection, DetectorConfig, ErrorClass, Evidence,
};
use crate::editops::{CandidateIndex, EditType};
use crate::lexicon::Lexicon;
use crate::normalizer::{segment_sentences, Normalizer, Sentence};
use crate::perto::PertoTable;
use crate::scorer::{ContextScorer, ScoreError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("sentence {0} does not exist")]
    UnknownSentence(usize),
    #[error("sentence {sentence_id} has no token {token_index}")]
    UnknownToken {
        sentence_id: usize,
        token_index: usize,
    },
    #[error("replacement for sentence {sentence_id} token {token_index} is empty or contains whitespace")]
    BadReplacement {
        sentence_id: usize,
        token_index: usize,
    },
}

/// Per-request overrides of the engine's [`DetectorConfig`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dist: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perto: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub word: String,
    pub score: f64,
    pub perto_match: bool,
    pub distance: usize,
    pub edit_type: EditType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionView {
    pub token_index: usize,
    pub token: String,
    pub error_class: ErrorClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
}

/// A correction as shown to a reviewer. `candidates` is in selection order;
/// `suggested` is the first candidate, or `None` when nothing was in reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionView {
    pub token_index: usize,
    pub original: String,
    pub error_class: ErrorClass,
    pub candidates: Vec<CandidateView>,
    pub suggested: Option<String>,
    pub used_perto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceReport {
    pub sentence_id: usize,
    pub text: String,
    pub detections: Vec<DetectionView>,
    pub corrections: Vec<CorrectionView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<SentenceError>,
    pub corrected_text: String,
}

impl SentenceReport {
    pub fn scorer_unavailable(&self) -> bool {
        self.error.as_ref().is_some_and(|e| {
            matches!(
                e.code.as_str(),
                "scorer_timeout" | "scorer_unreachable" | "scorer_status"
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResponse {
    pub normalized_text: String,
    pub sentences: Vec<SentenceReport>,
    pub corrected_text: String,
}

/// A reviewer-accepted replacement, addressed by sentence and token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptedCorrection {
    pub sentence_id: usize,
    pub token_index: usize,
    pub replacement: String,
}

/// Immutable checking engine. Safe to share between threads.
pub struct Engine {
    normalizer: Normalizer,
    lexicon: Lexicon,
    index: CandidateIndex,
    table: PertoTable,
    scorer: Box<dyn ContextScorer>,
    defaults: DetectorConfig,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("lexicon_entries", &self.lexicon.len())
            .field("scorer", &self.scorer.backend())
            .field("defaults", &self.defaults)
            .finish()
    }
}

fn score_error_view(e: &ScoreError) -> SentenceError {
    SentenceError {
        code: e.code().to_string(),
        message: e.to_string(),
    }
}

fn correction_view(c: &Correction) -> CorrectionView {
    CorrectionView {
        token_index: c.token_index,
        original: c.original.clone(),
        error_class: c.error_class,
        candidates: c
            .ranked_candidates
            .iter()
            .map(|k| CandidateView {
                word: k.word.clone(),
                score: k.score(),
                perto_match: k.perto_match.unwrap_or(false),
                distance: k.distance,
                edit_type: k.edit_type,
            })
            .collect(),
        suggested: Some(c.replacement.clone()),
        used_perto: c.used_perto,
    }
}

impl Engine {
    pub fn new(
        normalizer: Normalizer,
        lexicon: Lexicon,
        index: CandidateIndex,
        table: PertoTable,
        scorer: Box<dyn ContextScorer>,
        defaults: DetectorConfig,
    ) -> Result<Self, PipelineError> {
        defaults.validate().map_err(PipelineError::InvalidOptions)?;
        if defaults.max_dist > index.max_dist() {
            return Err(PipelineError::InvalidOptions(format!(
                "max_dist {} exceeds index depth {}",
                defaults.max_dist,
                index.max_dist()
            )));
        }
        Ok(Self {
            normalizer,
            lexicon,
            index,
            table,
            scorer,
            defaults,
        })
    }

    /// Build with a fresh index of depth `defaults.max_dist`.
    pub fn build(
        normalizer: Normalizer,
        lexicon: Lexicon,
        table: PertoTable,
        scorer: Box<dyn ContextScorer>,
        defaults: DetectorConfig,
    ) -> Result<Self, PipelineError> {
        let index = CandidateIndex::build(&lexicon, defaults.max_dist)
            .map_err(|e| PipelineError::InvalidOptions(e.to_string()))?;
        Self::new(normalizer, lexicon, index, table, scorer, defaults)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn index(&self) -> &CandidateIndex {
        &self.index
    }

    pub fn perto_table(&self) -> &PertoTable {
        &self.table
    }

    pub fn scorer(&self) -> &dyn ContextScorer {
        self.scorer.as_ref()
    }

    pub fn defaults(&self) -> &DetectorConfig {
        &self.defaults
    }

    pub fn effective(&self, opts: &CheckOptions) -> Result<DetectorConfig, PipelineError> {
        let cfg = DetectorConfig {
            max_dist: opts.max_dist.unwrap_or(self.defaults.max_dist),
            margin: opts.margin.unwrap_or(self.defaults.margin),
            top_k: opts.top_k.unwrap_or(self.defaults.top_k),
            perto: opts.perto.unwrap_or(self.defaults.perto),
        };
        cfg.validate().map_err(PipelineError::InvalidOptions)?;
        if cfg.max_dist > self.index.max_dist() {
            return Err(PipelineError::InvalidOptions(format!(
                "max_dist {} exceeds index depth {}",
                cfg.max_dist,
                self.index.max_dist()
            )));
        }
        Ok(cfg)
    }

    /// Detect and correct at most one error in `sentence`.
    pub fn check_sentence(
        &self,
        sentence: &Sentence,
        sentence_id: usize,
        cfg: &DetectorConfig,
    ) -> SentenceReport {
        let mut report = SentenceReport {
            sentence_id,
            text: sentence.text.trim().to_string(),
            detections: Vec::new(),
            corrections: Vec::new(),
            error: None,
            corrected_text: sentence.text.trim().to_string(),
        };

        let detection = match detect_nonword(sentence, &self.lexicon) {
            Some(d) => d,
            None => match detect_realword(sentence, &self.index, self.scorer.as_ref(), cfg) {
                Ok(Some(d)) => d,
                Ok(None) => return report,
                Err(DetectError::Score(e)) => {
                    report.error = Some(score_error_view(&e));
                    return report;
                }
                Err(DetectError::Edit(e)) => {
                    report.error = Some(SentenceError {
                        code: "edit_error".into(),
                        message: e.to_string(),
                    });
                    return report;
                }
            },
        };
        let token = sentence.tokens[detection.token_index].surface.clone();
        report.detections.push(DetectionView {
            token_index: detection.token_index,
            token: token.clone(),
            error_class: detection.error_class,
            evidence: detection.evidence.clone(),
        });

        let outcome = self.correct(sentence, &detection, cfg);
        match outcome {
            Ok(c) => {
                report.corrected_text = c.corrected_sentence.trim().to_string();
                report.corrections.push(correction_view(&c));
            }
            Err(CorrectError::NoCandidates { .. }) => {
                report.corrections.push(CorrectionView {
                    token_index: detection.token_index,
                    original: token,
                    error_class: detection.error_class,
                    candidates: Vec::new(),
                    suggested: None,
                    used_perto: false,
                });
            }
            Err(CorrectError::Score(e)) => report.error = Some(score_error_view(&e)),
            Err(e) => {
                report.error = Some(SentenceError {
                    code: "correction_error".into(),
                    message: e.to_string(),
                })
            }
        }
        report
    }

    fn correct(
        &self,
        sentence: &Sentence,
        d: &Detection,
        cfg: &DetectorConfig,
    ) -> Result<Correction, CorrectError> {
        match d.error_class {
            ErrorClass::NonWord => correct_nonword(
                sentence,
                d,
                &self.index,
                self.scorer.as_ref(),
                cfg,
                &self.table,
            ),
            ErrorClass::RealWord => correct_realword(
                sentence,
                d,
                &self.index,
                self.scorer.as_ref(),
                cfg,
                &self.table,
            ),
        }
    }

    /// Check free text. Scorer failures are reported per sentence; the
    /// remaining sentences are still processed.
    pub fn run_pipeline(
        &self,
        raw: &str,
        opts: &CheckOptions,
    ) -> Result<CheckResponse, PipelineError> {
        let cfg = self.effective(opts)?;
        let normalized = self.normalizer.normalize(raw);
        let sentences = segment_sentences(&normalized);
        let reports: Vec<SentenceReport> = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| self.check_sentence(s, i, &cfg))
            .collect();
        let edits: Vec<AcceptedCorrection> = reports
            .iter()
            .flat_map(|r| {
                r.corrections.iter().filter_map(move |c| {
                    c.suggested.as_ref().map(|s| AcceptedCorrection {
                        sentence_id: r.sentence_id,
                        token_index: c.token_index,
                        replacement: s.clone(),
                    })
                })
            })
            .collect();
        let corrected_text = splice(&normalized.content, &sentences, &edits)?;
        Ok(CheckResponse {
            normalized_text: normalized.content,
            sentences: reports,
            corrected_text,
        })
    }

    /// Check one pre-split line as a single sentence (corpus evaluation).
    pub fn check_line(
        &self,
        line: &str,
        sentence_id: usize,
        opts: &CheckOptions,
    ) -> Result<Option<SentenceReport>, PipelineError> {
        let cfg = self.effective(opts)?;
        let normalized = self.normalizer.normalize(line);
        Ok(Sentence::from_text(&normalized.content)
            .map(|s| self.check_sentence(&s, sentence_id, &cfg)))
    }

    /// Normalize `raw` and apply accepted replacements.
    pub fn apply(
        &self,
        raw: &str,
        accepted: &[AcceptedCorrection],
    ) -> Result<String, PipelineError> {
        let normalized = self.normalizer.normalize(raw);
        let sentences = segment_sentences(&normalized);
        splice(&normalized.content, &sentences, accepted)
    }
}

/// Replace token spans of `text` according to `edits`.
fn splice(
    text: &str,
    sentences: &[Sentence],
    edits: &[AcceptedCorrection],
) -> Result<String, PipelineError> {
    let mut spans = Vec::with_capacity(edits.len());
    for e in edits {
        let s = sentences
            .get(e.sentence_id)
            .ok_or(PipelineError::UnknownSentence(e.sentence_id))?;
        let t = s
            .tokens
            .get(e.token_index)
            .ok_or(PipelineError::UnknownToken {
                sentence_id: e.sentence_id,
                token_index: e.token_index,
            })?;
        if e.replacement.is_empty() || e.replacement.chars().any(char::is_whitespace) {
            return Err(PipelineError::BadReplacement {
                sentence_id: e.sentence_id,
                token_index: e.token_index,
            });
        }
        spans.push((t.char_span.start, t.char_span.end, e.replacement.as_str()));
    }
    spans.sort_by_key(|s| s.0);
    spans.dedup_by_key(|s| s.0);
    let mut out = String::with_capacity(text.len());
    let mut next = spans.into_iter().peekable();
    let mut skip_until = 0;
    for (i, c) in text.chars().enumerate() {
        if i < skip_until {
            continue;
        }
        if let Some(&(start, end, r)) = next.peek() {
            if start == i {
                out.push_str(r);
                skip_until = end;
                next.next();
                continue;
            }
        }
        out.push(c);
    }
    Ok(out)
}
