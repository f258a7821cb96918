use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zero-width non-joiner, the Persian pseudo-space.
pub const ZWNJ: char = '\u{200C}';

const DEFAULT_RULES: &str = include_str!("../../data/normalization.toml");

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Decode { offset: usize },
    #[error("failed to read normalization config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid normalization config: {0}")]
    Config(String),
}

/// Identifier of a normalization rule family, recorded in
/// [`NormalizedText::applied_rules`] when the rule changed the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    ArabicToPersian,
    Diacritics,
    Kashida,
    PseudoSpace,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharMapRule {
    #[serde(default = "enabled")]
    pub enabled: bool,
    /// Target character -> characters rewritten to it.
    #[serde(default)]
    pub map: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovalRule {
    #[serde(default = "enabled")]
    pub enabled: bool,
    #[serde(default)]
    pub chars: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoSpaceRule {
    #[serde(default = "enabled")]
    pub enabled: bool,
    #[serde(default)]
    pub prefixes: Vec<String>,
    #[serde(default)]
    pub suffixes: Vec<String>,
}

fn enabled() -> bool {
    true
}

/// Editable rule tables for [`Normalizer`]. The shipped default lives in
/// `data/normalization.toml`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub arabic_to_persian: CharMapRule,
    pub diacritics: RemovalRule,
    pub kashida: RemovalRule,
    pub pseudo_space: PseudoSpaceRule,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self::from_toml(DEFAULT_RULES).expect("bundled normalization table is valid")
    }
}

impl NormalizationConfig {
    pub fn from_toml(src: &str) -> Result<Self, NormalizeError> {
        toml::from_str(src).map_err(|e| NormalizeError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NormalizeError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|source| NormalizeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&src)
    }
}

/// Text after normalization, with the rule families that modified it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedText {
    pub content: String,
    pub applied_rules: Vec<RuleId>,
}

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.content
    }
}

/// Compiled form of a [`NormalizationConfig`].
#[derive(Debug, Clone)]
pub struct Normalizer {
    char_map: HashMap<char, char>,
    diacritics: HashSet<char>,
    kashida: HashSet<char>,
    prefixes: HashSet<String>,
    suffixes: HashSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::new(&NormalizationConfig::default()).expect("bundled normalization table is valid")
    }
}

fn single_char(s: &str, what: &str) -> Result<char, NormalizeError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(NormalizeError::Config(format!(
            "{what} entry {s:?} must be exactly one character"
        ))),
    }
}

impl Normalizer {
    pub fn new(cfg: &NormalizationConfig) -> Result<Self, NormalizeError> {
        let mut char_map = HashMap::new();
        if cfg.arabic_to_persian.enabled {
            for (target, sources) in &cfg.arabic_to_persian.map {
                let target = single_char(target, "arabic_to_persian target")?;
                for src in sources {
                    let src = single_char(src, "arabic_to_persian source")?;
                    if char_map.insert(src, target).is_some() {
                        return Err(NormalizeError::Config(format!(
                            "character U+{:04X} mapped twice",
                            src as u32
                        )));
                    }
                }
            }
        }
        let collect = |rule: &RemovalRule, what: &str| -> Result<HashSet<char>, NormalizeError> {
            if !rule.enabled {
                return Ok(HashSet::new());
            }
            rule.chars.iter().map(|c| single_char(c, what)).collect()
        };
        let diacritics = collect(&cfg.diacritics, "diacritics")?;
        let kashida = collect(&cfg.kashida, "kashida")?;

        // Mapping targets must be fixed points, otherwise a second pass
        // would rewrite them again.
        for (&src, &target) in &char_map {
            if char_map.contains_key(&target)
                || diacritics.contains(&target)
                || kashida.contains(&target)
            {
                return Err(NormalizeError::Config(format!(
                    "target U+{:04X} of U+{:04X} is itself rewritten",
                    target as u32, src as u32
                )));
            }
        }
        for c in [ZWNJ, ' '] {
            if char_map.contains_key(&c) || diacritics.contains(&c) || kashida.contains(&c) {
                return Err(NormalizeError::Config(format!(
                    "U+{:04X} may not be rewritten",
                    c as u32
                )));
            }
        }

        let mut this = Self {
            char_map,
            diacritics,
            kashida,
            prefixes: HashSet::new(),
            suffixes: HashSet::new(),
        };
        if cfg.pseudo_space.enabled {
            let affix = |this: &Self, a: &String| -> Result<String, NormalizeError> {
                let (canon, _) = this.apply_char_rules(a);
                if canon.is_empty() || canon.chars().any(|c| c.is_whitespace() || c == ZWNJ) {
                    return Err(NormalizeError::Config(format!(
                        "pseudo-space affix {a:?} must be a non-empty single word"
                    )));
                }
                Ok(canon)
            };
            let prefixes = cfg
                .pseudo_space
                .prefixes
                .iter()
                .map(|a| affix(&this, a))
                .collect::<Result<_, _>>()?;
            let suffixes = cfg
                .pseudo_space
                .suffixes
                .iter()
                .map(|a| affix(&this, a))
                .collect::<Result<_, _>>()?;
            this.prefixes = prefixes;
            this.suffixes = suffixes;
        }
        Ok(this)
    }

    pub fn from_config_path(path: impl AsRef<Path>) -> Result<Self, NormalizeError> {
        Self::new(&NormalizationConfig::load(path)?)
    }

    /// True if `c` would be rewritten or removed by a character rule.
    pub fn is_target_codepoint(&self, c: char) -> bool {
        self.char_map.contains_key(&c) || self.diacritics.contains(&c) || self.kashida.contains(&c)
    }

    fn apply_char_rules(&self, input: &str) -> (String, [bool; 3]) {
        let mut fired = [false; 3];
        let mut out = String::with_capacity(input.len());
        for c in input.chars() {
            if let Some(&t) = self.char_map.get(&c) {
                fired[0] = true;
                out.push(t);
            } else if self.diacritics.contains(&c) {
                fired[1] = true;
            } else if self.kashida.contains(&c) {
                fired[2] = true;
            } else {
                out.push(c);
            }
        }
        (out, fired)
    }

    fn repair_pseudo_spaces(&self, input: &str) -> Option<String> {
        if self.prefixes.is_empty() && self.suffixes.is_empty() {
            return None;
        }
        // Alternating runs: word chunks and whitespace gaps.
        let mut pieces: Vec<(&str, bool)> = Vec::new();
        let mut start = 0;
        let mut in_space = None;
        for (i, c) in input.char_indices() {
            let ws = c.is_whitespace();
            match in_space {
                Some(prev) if prev != ws => {
                    pieces.push((&input[start..i], prev));
                    start = i;
                }
                _ => {}
            }
            in_space = Some(ws);
        }
        if let Some(ws) = in_space {
            pieces.push((&input[start..], ws));
        }

        let mut changed = false;
        let mut out = String::with_capacity(input.len());
        for (i, &(piece, is_space)) in pieces.iter().enumerate() {
            let between_words = is_space && i > 0 && i + 1 < pieces.len();
            if between_words {
                let before = pieces[i - 1].0;
                let after = pieces[i + 1].0;
                if self.prefixes.contains(before) || self.suffixes.contains(after) {
                    out.push(ZWNJ);
                    changed = true;
                    continue;
                }
            }
            out.push_str(piece);
        }
        changed.then_some(out)
    }

    pub fn normalize(&self, raw: &str) -> NormalizedText {
        let (mut content, fired) = self.apply_char_rules(raw);
        let mut applied_rules = Vec::new();
        for (hit, id) in
            fired
                .iter()
                .zip([RuleId::ArabicToPersian, RuleId::Diacritics, RuleId::Kashida])
        {
            if *hit {
                applied_rules.push(id);
            }
        }
        if let Some(repaired) = self.repair_pseudo_spaces(&content) {
            content = repaired;
            applied_rules.push(RuleId::PseudoSpace);
        }
        NormalizedText {
            content,
            applied_rules,
        }
    }

    /// Decode and normalize raw bytes.
    pub fn normalize_bytes(&self, raw: &[u8]) -> Result<NormalizedText, NormalizeError> {
        let text = std::str::from_utf8(raw).map_err(|e| NormalizeError::Decode {
            offset: e.valid_up_to(),
        })?;
        Ok(self.normalize(text))
    }

    /// Normalize a single word, e.g. a lexicon entry.
    pub fn normalize_word(&self, word: &str) -> String {
        self.normalize(word).content
    }
}
