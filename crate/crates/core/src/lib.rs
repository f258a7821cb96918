//! Spelling error detection and correction for Persian clinical text.
//!
//! The crate is organised as a pipeline: [`normalizer`] canonicalises raw
//! text, [`lexicon`] and [`editops`] provide candidate generation,
//! [`scorer`] ranks candidates in context, [`perto`] supplies the visual
//! similarity filter, and [`detector`] / [`corrector`] find and fix the
//! first error of each sentence. [`pipeline::Engine`] wires them together;
//! [`evalharness`] injects synthetic errors and scores predictions.

pub mod corrector;
pub mod detector;
pub mod editops;
pub mod evalharness;
pub mod lexicon;
pub mod normalizer;
pub mod perto;
pub mod pipeline;
pub mod scorer;

pub use corrector::{
    correct_nonword, correct_realword, rank_and_select, CorrectError, Correction, Ranking,
};
pub use detector::{
    detect_nonword, detect_realword, Detection, DetectorConfig, ErrorClass, Evidence,
};
pub use editops::{
    classify_edit, generate_candidates, osa_distance, Candidate, CandidateIndex, EditError,
    EditType,
};
pub use lexicon::{Lexicon, LexiconError};
pub use normalizer::{NormalizationConfig, NormalizedText, Normalizer, Sentence, Token};
pub use perto::{perto_code, perto_match, PertoCode, PertoTable};
pub use pipeline::{
    AcceptedCorrection, CheckOptions, CheckResponse, Engine, PipelineError, SentenceReport,
};
pub use scorer::{
    ContextScorer, FixedScorer, FourGramModel, MaskedQuery, RemoteScorer, ScoreDistribution,
    ScoreError,
};
