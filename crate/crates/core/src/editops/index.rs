use std::collections::{HashMap, HashSet};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{classify_edit, osa_distance_chars, Candidate, EditError, MAX_SUPPORTED_DISTANCE};
use crate::lexicon::Lexicon;

const CACHE_MAGIC: &[u8; 8] = b"SPKIDX\0\0";
const CACHE_VERSION: u32 = 1;

/// 64-bit FNV-1a.
fn fnv1a(chars: &[char]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut buf = [0u8; 4];
    for c in chars {
        for b in c.encode_utf8(&mut buf).bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// All strings reachable from `word` by at most `max_deletes` deletions,
/// including `word` itself.
fn deletion_variants(word: &[char], max_deletes: usize) -> HashSet<Vec<char>> {
    let mut seen: HashSet<Vec<char>> = HashSet::new();
    seen.insert(word.to_vec());
    let mut frontier = vec![word.to_vec()];
    for _ in 0..max_deletes {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..w.len() {
                let mut v = w.clone();
                v.remove(i);
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Deletion-neighborhood index over a lexicon. Each entry is filed under the
/// hash of every string obtainable from it by up to `max_dist` deletions; a
/// query probes its own deletion neighborhood and verifies hits with the
/// exact distance.
#[derive(Debug, Clone)]
pub struct CandidateIndex {
    words: Vec<String>,
    word_chars: Vec<Vec<char>>,
    buckets: HashMap<u64, Vec<u32>>,
    max_dist: usize,
    fingerprint: String,
}

impl CandidateIndex {
    pub fn build(lex: &Lexicon, max_dist: usize) -> Result<Self, EditError> {
        check_dist(max_dist)?;
        let words: Vec<String> = lex.sorted_words().into_iter().map(str::to_string).collect();
        let word_chars: Vec<Vec<char>> = words.iter().map(|w| w.chars().collect()).collect();
        let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
        for (id, chars) in word_chars.iter().enumerate() {
            for v in deletion_variants(chars, max_dist) {
                buckets.entry(fnv1a(&v)).or_default().push(id as u32);
            }
        }
        for ids in buckets.values_mut() {
            ids.sort_unstable();
            ids.dedup();
        }
        Ok(Self {
            words,
            word_chars,
            buckets,
            max_dist,
            fingerprint: lex.fingerprint(),
        })
    }

    pub fn max_dist(&self) -> usize {
        self.max_dist
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words
            .binary_search_by(|w| w.as_str().cmp(word))
            .is_ok()
    }

    /// Lexicon entries within `max_dist` of `word`, excluding `word`
    /// itself, ordered by distance then lexicographically. The edit type
    /// describes how each candidate would turn into `word`.
    pub fn candidates(&self, word: &str, max_dist: usize) -> Result<Vec<Candidate>, EditError> {
        check_dist(max_dist)?;
        if max_dist > self.max_dist {
            return Err(EditError::IndexTooShallow {
                requested: max_dist,
                built: self.max_dist,
            });
        }
        let query: Vec<char> = word.chars().collect();
        let mut hits: Vec<u32> = Vec::new();
        for v in deletion_variants(&query, max_dist) {
            if let Some(ids) = self.buckets.get(&fnv1a(&v)) {
                hits.extend_from_slice(ids);
            }
        }
        hits.sort_unstable();
        hits.dedup();

        let mut out = Vec::new();
        for id in hits {
            let chars = &self.word_chars[id as usize];
            if chars.len().abs_diff(query.len()) > max_dist || *chars == query {
                continue;
            }
            let distance = osa_distance_chars(chars, &query);
            if distance <= max_dist {
                let w = &self.words[id as usize];
                out.push(Candidate::new(w.clone(), distance, classify_edit(w, word)?));
            }
        }
        out.sort_by(|a, b| {
            a.distance
                .cmp(&b.distance)
                .then_with(|| a.word.cmp(&b.word))
        });
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        out.write_all(&(self.max_dist as u32).to_le_bytes())?;
        write_bytes(&mut out, self.fingerprint.as_bytes())?;
        out.write_all(&(self.words.len() as u32).to_le_bytes())?;
        for w in &self.words {
            write_bytes(&mut out, w.as_bytes())?;
        }
        let mut keys: Vec<&u64> = self.buckets.keys().collect();
        keys.sort_unstable();
        out.write_all(&(keys.len() as u64).to_le_bytes())?;
        for k in keys {
            let ids = &self.buckets[k];
            out.write_all(&k.to_le_bytes())?;
            out.write_all(&(ids.len() as u32).to_le_bytes())?;
            for id in ids {
                out.write_all(&id.to_le_bytes())?;
            }
        }
        out.flush()
    }

    /// Read a cache file. Returns `Ok(None)` when the file was written for a
    /// different lexicon, depth or format version.
    pub fn load(
        path: impl AsRef<Path>,
        lex: &Lexicon,
        max_dist: usize,
    ) -> std::io::Result<Option<Self>> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC || read_u32(&mut r)? != CACHE_VERSION {
            return Ok(None);
        }
        let depth = read_u32(&mut r)? as usize;
        let fingerprint = String::from_utf8(read_bytes(&mut r)?).map_err(invalid)?;
        if depth != max_dist || fingerprint != lex.fingerprint() {
            return Ok(None);
        }
        let n = read_u32(&mut r)? as usize;
        let mut words = Vec::with_capacity(n);
        for _ in 0..n {
            words.push(String::from_utf8(read_bytes(&mut r)?).map_err(invalid)?);
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let nb = u64::from_le_bytes(b8) as usize;
        let mut buckets = HashMap::with_capacity(nb);
        for _ in 0..nb {
            r.read_exact(&mut b8)?;
            let key = u64::from_le_bytes(b8);
            let len = read_u32(&mut r)? as usize;
            let mut ids = Vec::with_capacity(len);
            for _ in 0..len {
                let id = read_u32(&mut r)?;
                if id as usize >= n {
                    return Err(invalid("bucket id out of range"));
                }
                ids.push(id);
            }
            buckets.insert(key, ids);
        }
        let word_chars = words.iter().map(|w| w.chars().collect()).collect();
        Ok(Some(Self {
            words,
            word_chars,
            buckets,
            max_dist: depth,
            fingerprint,
        }))
    }

    /// Use the cache at `path` when it matches `lex`, otherwise rebuild and
    /// rewrite it.
    pub fn load_or_build(
        path: impl AsRef<Path>,
        lex: &Lexicon,
        max_dist: usize,
    ) -> Result<Self, EditError> {
        let path = path.as_ref();
        if path.exists() {
            match Self::load(path, lex, max_dist) {
                Ok(Some(index)) => return Ok(index),
                Ok(None) => {
                    tracing::info!(path = %path.display(), "index cache is stale, rebuilding")
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "unreadable index cache, rebuilding")
                }
            }
        }
        let index = Self::build(lex, max_dist)?;
        index
            .save(path)
            .map_err(|e| EditError::Cache(e.to_string()))?;
        Ok(index)
    }
}

fn check_dist(d: usize) -> Result<(), EditError> {
    if (1..=MAX_SUPPORTED_DISTANCE).contains(&d) {
        Ok(())
    } else {
        Err(EditError::UnsupportedDistance(d))
    }
}

fn invalid<E: std::fmt::Display>(e: E) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}

fn write_bytes<W: Write>(w: &mut W, b: &[u8]) -> std::io::Result<()> {
    w.write_all(&(b.len() as u32).to_le_bytes())?;
    w.write_all(b)
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_bytes<R: Read>(r: &mut R) -> std::io::Result<Vec<u8>> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(invalid("string too long"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
