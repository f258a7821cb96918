//! PERTO orthographic codes.
//!
//! Each Persian letter maps to the code symbol of its shape group; words
//! differing only in look-alike letters share a code. Characters outside the
//! table map to themselves.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_TABLE: &str = include_str!("../data/perto_table.toml");

#[derive(Debug, Error)]
pub enum PertoError {
    #[error("failed to read PERTO table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid PERTO table: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableFile {
    codes: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PertoTable {
    mapping: HashMap<char, char>,
    sets: Vec<(char, Vec<char>)>,
}

impl Default for PertoTable {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TABLE).expect("bundled PERTO table is valid")
    }
}

fn one_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

impl PertoTable {
    pub fn from_sets<I>(sets: I) -> Result<Self, PertoError>
    where
        I: IntoIterator<Item = (char, Vec<char>)>,
    {
        let mut mapping = HashMap::new();
        let mut out = Vec::new();
        for (code, chars) in sets {
            if out.iter().any(|(c, _): &(char, Vec<char>)| *c == code) {
                return Err(PertoError::Invalid(format!("code {code:?} used twice")));
            }
            if chars.is_empty() {
                return Err(PertoError::Invalid(format!(
                    "code {code:?} has no characters"
                )));
            }
            for &c in &chars {
                if mapping.insert(c, code).is_some() {
                    return Err(PertoError::Invalid(format!(
                        "character {c:?} (U+{:04X}) appears in more than one set",
                        c as u32
                    )));
                }
            }
            out.push((code, chars));
        }
        Ok(Self { mapping, sets: out })
    }

    pub fn from_toml(src: &str) -> Result<Self, PertoError> {
        let file: TableFile =
            toml::from_str(src).map_err(|e| PertoError::Invalid(e.to_string()))?;
        let mut sets = Vec::with_capacity(file.codes.len());
        for (code, chars) in file.codes {
            let code = one_char(&code).ok_or_else(|| {
                PertoError::Invalid(format!("code {code:?} must be one character"))
            })?;
            let chars = chars
                .iter()
                .map(|c| {
                    one_char(c).ok_or_else(|| {
                        PertoError::Invalid(format!("entry {c:?} must be one character"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            sets.push((code, chars));
        }
        Self::from_sets(sets)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PertoError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|source| PertoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&src)
    }

    pub fn code_of(&self, c: char) -> Option<char> {
        self.mapping.get(&c).copied()
    }

    /// The shape groups, in table order.
    pub fn sets(&self) -> &[(char, Vec<char>)] {
        &self.sets
    }

    pub fn characters(&self) -> impl Iterator<Item = char> + '_ {
        self.sets.iter().flat_map(|(_, cs)| cs.iter().copied())
    }

    /// Characters sharing `c`'s code, `c` excluded.
    pub fn look_alikes(&self, c: char) -> Vec<char> {
        let Some(code) = self.code_of(c) else {
            return Vec::new();
        };
        self.sets
            .iter()
            .find(|(k, _)| *k == code)
            .map(|(_, cs)| cs.iter().copied().filter(|&x| x != c).collect())
            .unwrap_or_default()
    }

    pub fn code(&self, word: &str) -> PertoCode {
        PertoCode(word.chars().map(|c| self.code_of(c).unwrap_or(c)).collect())
    }

    pub fn matches(&self, a: &str, b: &str) -> bool {
        // Codes are per character, so unequal lengths can never match.
        a.chars().count() == b.chars().count() && self.code(a) == self.code(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PertoCode(String);

impl PertoCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl std::fmt::Display for PertoCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn perto_code(word: &str, table: &PertoTable) -> PertoCode {
    table.code(word)
}

pub fn perto_match(a: &str, b: &str, table: &PertoTable) -> bool {
    table.matches(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let t = PertoTable::default();
        assert_eq!(perto_code("پرگاز", &t).as_str(), "14904");
        assert_eq!(perto_code("با", &t).as_str(), "10");
    }

    #[test]
    fn unmapped_characters_pass_through() {
        let t = PertoTable::default();
        assert_eq!(perto_code("ب2x\u{200C}ا", &t).as_str(), "12x\u{200C}0");
    }

    #[test]
    fn look_alike_words_match() {
        let t = PertoTable::default();
        assert!(perto_match("کک", "گگ", &t));
        assert!(perto_match("مایغ", "مایع", &t));
        assert!(perto_match("کبد", "کبد", &t));
        assert!(!perto_match("کبد", "کبدی", &t));
        assert!(!perto_match("کد", "دک", &t));
    }

    #[test]
    fn default_table_shape() {
        let t = PertoTable::default();
        assert_eq!(t.sets().len(), 14);
        assert_eq!(t.characters().count(), 33);
        assert_eq!(t.look_alikes('ع'), vec!['غ']);
        assert!(t.look_alikes('م').is_empty());
        assert!(t.look_alikes('x').is_empty());
    }

    #[test]
    fn duplicate_character_rejected() {
        let err = PertoTable::from_sets([('0', vec!['a', 'b']), ('1', vec!['b'])]).unwrap_err();
        assert!(matches!(err, PertoError::Invalid(_)));
        assert!(PertoTable::from_toml("[codes]\n\"10\" = [\"a\"]\n").is_err());
        assert!(PertoTable::from_sets([('0', vec![])]).is_err());
    }
}
