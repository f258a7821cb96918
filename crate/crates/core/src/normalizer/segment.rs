use serde::{Deserialize, Serialize};

use super::rules::{NormalizedText, ZWNJ};

/// Half-open range of character (not byte) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    fn shifted(self, by: usize) -> Self {
        Self::new(self.start + by, self.end + by)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub index: usize,
    pub char_span: CharSpan,
}

impl Token {
    /// Tokens made only of Persian/Arabic-script letters (and ZWNJ) are
    /// checked against the lexicon. Digits, Latin words and units pass
    /// through untouched.
    pub fn is_checkable(&self) -> bool {
        is_checkable_word(&self.surface)
    }
}

pub fn is_checkable_word(word: &str) -> bool {
    let mut has_letter = false;
    for c in word.chars() {
        if c == ZWNJ || is_arabic_mark(c) {
            continue;
        }
        if is_arabic_script(c) && c.is_alphabetic() {
            has_letter = true;
        } else {
            return false;
        }
    }
    has_letter
}

fn is_arabic_script(c: char) -> bool {
    matches!(c as u32,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

fn is_arabic_mark(c: char) -> bool {
    matches!(c as u32, 0x0610..=0x061A | 0x064B..=0x065F | 0x0670 | 0x06D6..=0x06ED)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == ZWNJ || is_arabic_mark(c)
}

/// Characters kept inside a token when flanked by word characters on both
/// sides ("2.5", "3/4", "T1-T2").
fn is_connector(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | '/' | '-' | '_' | ':' | '\u{066B}' | '\u{066C}' | '\u{00D7}'
    )
}

fn is_sentence_delimiter(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\u{061F}' | '\u{06D4}')
}

/// A sentence of normalized text. `text` is exactly the characters covered
/// by `source_span`; the terminating delimiter is not included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub source_span: CharSpan,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Build a standalone sentence from a single line of normalized text.
    pub fn from_text(text: &str) -> Option<Self> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return None;
        }
        Some(Self {
            text: text.to_string(),
            source_span: CharSpan::new(0, text.chars().count()),
            tokens,
        })
    }

    pub fn token_surfaces(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.surface.clone()).collect()
    }

    /// Sentence text with token `index` replaced by `replacement`; all other
    /// characters are preserved.
    pub fn with_replacement(&self, index: usize, replacement: &str) -> String {
        self.with_replacements(&[(index, replacement)])
    }

    pub fn with_replacements(&self, edits: &[(usize, &str)]) -> String {
        let mut spans: Vec<(CharSpan, &str)> = edits
            .iter()
            .filter_map(|&(i, r)| self.tokens.get(i).map(|t| (t.char_span, r)))
            .collect();
        spans.sort_by_key(|(s, _)| s.start);
        let base = self.source_span.start;
        let mut out = String::with_capacity(self.text.len());
        let mut edits = spans.into_iter().peekable();
        let mut skip_until = 0;
        for (i, c) in self.text.chars().enumerate() {
            let abs = base + i;
            if abs < skip_until {
                continue;
            }
            if let Some((span, r)) = edits.peek() {
                if span.start == abs {
                    out.push_str(r);
                    skip_until = span.end;
                    edits.next();
                    continue;
                }
            }
            out.push(c);
        }
        out
    }
}

/// Split a sentence into word tokens. Punctuation is dropped; ZWNJ stays
/// inside tokens. Spans are character offsets into `sentence_text`.
pub fn tokenize(sentence_text: &str) -> Vec<Token> {
    let chars: Vec<char> = sentence_text.chars().collect();
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |start: &mut Option<usize>, end: usize, tokens: &mut Vec<Token>| {
        if let Some(s) = start.take() {
            tokens.push(Token {
                surface: chars[s..end].iter().collect(),
                index: tokens.len(),
                char_span: CharSpan::new(s, end),
            });
        }
    };
    for i in 0..chars.len() {
        let c = chars[i];
        if is_word_char(c) {
            if start.is_none() {
                start = Some(i);
            }
        } else if start.is_some()
            && is_connector(c)
            && chars.get(i + 1).copied().is_some_and(is_word_char)
        {
            // inside a token
        } else {
            flush(&mut start, i, &mut tokens);
        }
    }
    flush(&mut start, chars.len(), &mut tokens);
    tokens
}

/// Raw segments between delimiters, including ones with no tokens.
pub(crate) fn split_segments(text: &str) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    for i in 0..chars.len() {
        if is_delimiter_at(&chars, i) {
            spans.push(CharSpan::new(start, i));
            start = i + 1;
        }
    }
    if start < chars.len() {
        spans.push(CharSpan::new(start, chars.len()));
    }
    spans
}

fn is_delimiter_at(chars: &[char], i: usize) -> bool {
    let c = chars[i];
    if !is_sentence_delimiter(c) {
        return false;
    }
    // Decimal point, not a full stop.
    if c == '.' && i > 0 {
        let prev = chars[i - 1];
        if let Some(&next) = chars.get(i + 1) {
            if prev.is_numeric() && next.is_numeric() {
                return false;
            }
        }
    }
    true
}

/// Split normalized text into sentences on `.`, `!`, `?`, `؟` and `۔`.
/// Segments without any token are dropped.
pub fn segment_sentences(text: &NormalizedText) -> Vec<Sentence> {
    let chars: Vec<char> = text.content.chars().collect();
    split_segments(&text.content)
        .into_iter()
        .filter_map(|span| {
            let seg: String = chars[span.start..span.end].iter().collect();
            let tokens: Vec<Token> = tokenize(&seg)
                .into_iter()
                .map(|mut t| {
                    t.char_span = t.char_span.shifted(span.start);
                    t
                })
                .collect();
            (!tokens.is_empty()).then_some(Sentence {
                text: seg,
                source_span: span,
                tokens,
            })
        })
        .collect()
}
