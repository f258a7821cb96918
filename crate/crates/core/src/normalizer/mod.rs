//! Persian text normalization, sentence segmentation and tokenization.
//!
//! Normalization applies four rule families, each driven by an editable
//! table (see `data/normalization.toml`):
//!
//! * Arabic code points mapped to their Persian forms (`ي` -> `ی`, `ك` -> `ک`, ...)
//! * removal of diacritic marks
//! * removal of kashida (U+0640)
//! * pseudo-space repair: whitespace next to listed affixes becomes ZWNJ
//!
//! Normalization is idempotent. Segmentation splits on `.`, `!`, `?`, `؟`
//! and `۔`; tokenization splits on whitespace and punctuation while keeping
//! ZWNJ-joined words whole.

mod rules;
mod segment;

pub use rules::{
    CharMapRule, NormalizationConfig, NormalizeError, NormalizedText, Normalizer, PseudoSpaceRule,
    RemovalRule, RuleId, ZWNJ,
};
pub use segment::{is_checkable_word, segment_sentences, tokenize, CharSpan, Sentence, Token};
