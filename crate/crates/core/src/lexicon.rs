//! Reference dictionary: a deduplicated set of normalized words.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::normalizer::{is_checkable_word, tokenize, Normalizer};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{source_name}: line {line} is not valid UTF-8")]
    Decode { source_name: String, line: usize },
    #[error("{source_name}: {source}")]
    Io {
        source_name: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceCount {
    pub source: String,
    pub entries: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashSet<String>,
    source_counts: Vec<SourceCount>,
}

impl PartialEq for Lexicon {
    /// Two lexicons are equal when they hold the same words; provenance is
    /// not compared.
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Lexicon {}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from already-normalized words.
    pub fn from_words<I, S>(source: &str, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: HashSet<String> = words
            .into_iter()
            .map(Into::into)
            .filter(|w| !w.is_empty())
            .collect();
        Self {
            source_counts: vec![SourceCount {
                source: source.to_string(),
                entries: entries.len(),
            }],
            entries,
        }
    }

    /// Read a word list: UTF-8, one word per line, `#` starts a comment line,
    /// blank lines are skipped. Every word is normalized before insertion.
    pub fn load<R: BufRead>(
        source_name: &str,
        mut reader: R,
        normalizer: &Normalizer,
    ) -> Result<Self, LexiconError> {
        let mut entries = HashSet::new();
        let mut buf = Vec::new();
        let mut line = 0;
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(|source| LexiconError::Io {
                    source_name: source_name.to_string(),
                    source,
                })?;
            if n == 0 {
                break;
            }
            line += 1;
            let text = std::str::from_utf8(&buf).map_err(|_| LexiconError::Decode {
                source_name: source_name.to_string(),
                line,
            })?;
            let text = text.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let word = normalizer.normalize_word(text);
            if !word.is_empty() {
                entries.insert(word);
            }
        }
        Ok(Self {
            source_counts: vec![SourceCount {
                source: source_name.to_string(),
                entries: entries.len(),
            }],
            entries,
        })
    }

    pub fn load_path(
        path: impl AsRef<Path>,
        normalizer: &Normalizer,
    ) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| LexiconError::Io {
            source_name: name.clone(),
            source,
        })?;
        Self::load(&name, std::io::BufReader::new(file), normalizer)
    }

    /// Collect every checkable token of a corpus (one or more sentences per
    /// line) into a lexicon.
    pub fn from_corpus<R: BufRead>(
        source_name: &str,
        reader: R,
        normalizer: &Normalizer,
    ) -> Result<Self, LexiconError> {
        let mut words = HashSet::new();
        for (i, line) in reader.split(b'\n').enumerate() {
            let line = line.map_err(|source| LexiconError::Io {
                source_name: source_name.to_string(),
                source,
            })?;
            let text = std::str::from_utf8(&line).map_err(|_| LexiconError::Decode {
                source_name: source_name.to_string(),
                line: i + 1,
            })?;
            let normalized = normalizer.normalize(text);
            words.extend(
                tokenize(&normalized.content)
                    .into_iter()
                    .filter(|t| t.is_checkable())
                    .map(|t| t.surface),
            );
        }
        Ok(Self::from_words(source_name, words))
    }

    /// Set union of two lexicons; source tallies are concatenated.
    pub fn merge(general: &Lexicon, specialized: &Lexicon) -> Lexicon {
        let mut entries = general.entries.clone();
        entries.extend(specialized.entries.iter().cloned());
        let mut source_counts = general.source_counts.clone();
        source_counts.extend(specialized.source_counts.iter().cloned());
        Lexicon {
            entries,
            source_counts,
        }
    }

    #[inline]
    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_counts(&self) -> &[SourceCount] {
        &self.source_counts
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Entries in lexicographic order.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.iter().collect();
        words.sort_unstable();
        words
    }

    /// Content hash over the sorted entries, used to invalidate cached
    /// candidate indexes.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for w in self.sorted_words() {
            hasher.update(w.as_bytes());
            hasher.update([0u8]);
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Write as a sorted word list.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in self.sorted_words() {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    /// Number of entries that are plain words eligible for checking.
    pub fn checkable_len(&self) -> usize {
        self.iter().filter(|w| is_checkable_word(w)).count()
    }
}
