//! Weighted bidirectional four-gram model.
//!
//! For a masked position the model interpolates add-k smoothed estimates of
//! orders 1 to 4 in each direction: the forward direction conditions on the
//! preceding words, the backward direction on the following words. The two
//! interpolated scores are mixed with `forward_weight` and the result is
//! renormalized over the requested words.
//!
//! Sentences are padded with three `<s>` markers before and three `</s>`
//! markers after, so every order always has a full context. Only real words
//! are counted as n-gram targets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ContextScorer, MaskedQuery, ScoreDistribution, ScoreError};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
const ORDER: usize = 4;
const PAD: usize = ORDER - 1;
const FORMAT_HEADER: &str = "#spellkit-fourgram v1";

#[derive(Debug, Error)]
pub enum FourGramError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("model file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Interpolation weights, indexed by order (`per_order[0]` is the unigram
/// weight). Defaults: 0.4 / 0.3 / 0.2 / 0.1 for orders 4 / 3 / 2 / 1 with
/// both directions counted equally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourGramWeights {
    pub per_order: [f64; ORDER],
    pub forward_weight: f64,
    pub smoothing: f64,
}

impl Default for FourGramWeights {
    fn default() -> Self {
        Self {
            per_order: [0.1, 0.2, 0.3, 0.4],
            forward_weight: 0.5,
            smoothing: 0.01,
        }
    }
}

impl FourGramWeights {
    pub fn validate(&self) -> Result<(), FourGramError> {
        if self.per_order.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(FourGramError::InvalidWeights(
                "order weights must be non-negative".into(),
            ));
        }
        let sum: f64 = self.per_order.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(FourGramError::InvalidWeights(format!(
                "order weights sum to {sum}, expected 1"
            )));
        }
        if !(0.0..=1.0).contains(&self.forward_weight) {
            return Err(FourGramError::InvalidWeights(
                "forward weight must be in [0, 1]".into(),
            ));
        }
        if !(self.smoothing.is_finite() && self.smoothing > 0.0) {
            return Err(FourGramError::InvalidWeights(
                "smoothing must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Counts for one direction: `grams[n-1]` maps space-joined n-grams to
/// counts, `contexts[n-1]` maps the (n-1)-word prefix to the summed count of
/// its continuations.
#[derive(Debug, Clone, Default, PartialEq)]
struct DirectionCounts {
    grams: [HashMap<String, u64>; ORDER],
    contexts: [HashMap<String, u64>; ORDER],
}

impl DirectionCounts {
    fn add_sequence(&mut self, padded: &[&str]) {
        for target in PAD..padded.len() - PAD {
            for n in 1..=ORDER {
                let gram = padded[target + 1 - n..=target].join(" ");
                *self.grams[n - 1].entry(gram).or_default() += 1;
            }
        }
    }

    fn rebuild_contexts(&mut self) {
        for n in 1..=ORDER {
            let mut ctx: HashMap<String, u64> = HashMap::new();
            for (gram, &c) in &self.grams[n - 1] {
                let prefix = match gram.rfind(' ') {
                    Some(i) => &gram[..i],
                    None => "",
                };
                *ctx.entry(prefix.to_string()).or_default() += c;
            }
            self.contexts[n - 1] = ctx;
        }
    }

    /// Interpolated probability of `word` after `history` (most recent last,
    /// at least ORDER-1 items).
    fn interpolated(&self, history: &[&str], word: &str, w: &FourGramWeights, vocab: f64) -> f64 {
        let mut total = 0.0;
        let mut key = String::new();
        for n in 1..=ORDER {
            let ctx = &history[history.len() - (n - 1)..];
            key.clear();
            for c in ctx {
                key.push_str(c);
                key.push(' ');
            }
            let ctx_key = key.trim_end();
            let ctx_count = self.contexts[n - 1].get(ctx_key).copied().unwrap_or(0) as f64;
            key.push_str(word);
            let count = self.grams[n - 1].get(key.as_str()).copied().unwrap_or(0) as f64;
            let p = (count + w.smoothing) / (ctx_count + w.smoothing * vocab);
            total += w.per_order[n - 1] * p;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourGramModel {
    weights: FourGramWeights,
    forward: DirectionCounts,
    backward: DirectionCounts,
    vocabulary: HashSet<String>,
}

fn pad(tokens: &[String]) -> Vec<&str> {
    let mut padded = Vec::with_capacity(tokens.len() + 2 * PAD);
    padded.extend(std::iter::repeat_n(BOS, PAD));
    padded.extend(tokens.iter().map(String::as_str));
    padded.extend(std::iter::repeat_n(EOS, PAD));
    padded
}

/// Count n-grams of orders 1-4 in both directions over tokenized sentences.
pub fn train_fourgram<I>(
    corpus: I,
    weights: FourGramWeights,
) -> Result<FourGramModel, FourGramError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    weights.validate()?;
    let mut forward = DirectionCounts::default();
    let mut backward = DirectionCounts::default();
    let mut vocabulary = HashSet::new();
    for sentence in corpus {
        if sentence.is_empty() {
            continue;
        }
        let padded = pad(&sentence);
        forward.add_sequence(&padded);
        let reversed: Vec<&str> = padded.iter().rev().copied().collect();
        backward.add_sequence(&reversed);
        vocabulary.extend(sentence);
    }
    if vocabulary.is_empty() {
        return Err(FourGramError::EmptyCorpus);
    }
    forward.rebuild_contexts();
    backward.rebuild_contexts();
    Ok(FourGramModel {
        weights,
        forward,
        backward,
        vocabulary,
    })
}

impl FourGramModel {
    pub fn weights(&self) -> &FourGramWeights {
        &self.weights
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn knows(&self, word: &str) -> bool {
        self.vocabulary.contains(word)
    }

    /// Smoothing denominator size: known words plus one unknown slot.
    fn vocab_size(&self) -> f64 {
        (self.vocabulary.len() + 1) as f64
    }

    /// Unnormalized bidirectional score of `word` at the masked position.
    pub fn raw_score(&self, query: &MaskedQuery, word: &str) -> f64 {
        let left = query.left_context();
        let right = query.right_context();
        let mut fwd_hist: Vec<&str> = std::iter::repeat_n(BOS, PAD).collect();
        fwd_hist.extend(left.iter().map(String::as_str));
        let mut bwd_hist: Vec<&str> = std::iter::repeat_n(EOS, PAD).collect();
        bwd_hist.extend(right.iter().rev().map(String::as_str));
        let v = self.vocab_size();
        let f = self.forward.interpolated(&fwd_hist, word, &self.weights, v);
        let b = self
            .backward
            .interpolated(&bwd_hist, word, &self.weights, v);
        self.weights.forward_weight * f + (1.0 - self.weights.forward_weight) * b
    }

    pub fn save<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let w = &self.weights;
        writeln!(out, "{FORMAT_HEADER}")?;
        writeln!(
            out,
            "#weights 1={} 2={} 3={} 4={}",
            w.per_order[0], w.per_order[1], w.per_order[2], w.per_order[3]
        )?;
        writeln!(out, "#forward-weight {}", w.forward_weight)?;
        writeln!(out, "#smoothing {}", w.smoothing)?;
        for (name, dir) in [("forward", &self.forward), ("backward", &self.backward)] {
            for n in 1..=ORDER {
                writeln!(out, "[{name} {n}]")?;
                let sorted: BTreeMap<&String, &u64> = dir.grams[n - 1].iter().collect();
                for (gram, count) in sorted {
                    writeln!(out, "{gram}\t{count}")?;
                }
            }
        }
        out.flush()
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self, FourGramError> {
        let mut weights = FourGramWeights::default();
        let mut forward = DirectionCounts::default();
        let mut backward = DirectionCounts::default();
        let mut section: Option<(bool, usize)> = None;
        let mut seen_header = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let err = |msg: &str| FourGramError::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            if !seen_header {
                if line != FORMAT_HEADER {
                    return Err(err("missing or unsupported format header"));
                }
                seen_header = true;
                continue;
            }
            if let Some(rest) = line.strip_prefix("#weights ") {
                for part in rest.split_whitespace() {
                    let (order, value) = part.split_once('=').ok_or_else(|| err("bad weight"))?;
                    let order: usize = order.parse().map_err(|_| err("bad weight order"))?;
                    if !(1..=ORDER).contains(&order) {
                        return Err(err("weight order out of range"));
                    }
                    weights.per_order[order - 1] =
                        value.parse().map_err(|_| err("bad weight value"))?;
                }
            } else if let Some(rest) = line.strip_prefix("#forward-weight ") {
                weights.forward_weight =
                    rest.trim().parse().map_err(|_| err("bad forward weight"))?;
            } else if let Some(rest) = line.strip_prefix("#smoothing ") {
                weights.smoothing = rest.trim().parse().map_err(|_| err("bad smoothing"))?;
            } else if line.starts_with('#') || line.is_empty() {
                continue;
            } else if let Some(head) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let (dir, n) = head.split_once(' ').ok_or_else(|| err("bad section"))?;
                let n: usize = n.parse().map_err(|_| err("bad section order"))?;
                if !(1..=ORDER).contains(&n) {
                    return Err(err("section order out of range"));
                }
                let is_forward = match dir {
                    "forward" => true,
                    "backward" => false,
                    _ => return Err(err("unknown direction")),
                };
                section = Some((is_forward, n));
            } else {
                let (is_forward, n) = section.ok_or_else(|| err("record outside a section"))?;
                let (gram, count) = line.rsplit_once('\t').ok_or_else(|| err("missing tab"))?;
                if gram.split(' ').count() != n {
                    return Err(err("n-gram length does not match section"));
                }
                let count: u64 = count.parse().map_err(|_| err("bad count"))?;
                let dir = if is_forward {
                    &mut forward
                } else {
                    &mut backward
                };
                dir.grams[n - 1].insert(gram.to_string(), count);
            }
        }
        if !seen_header {
            return Err(FourGramError::Parse {
                line: 0,
                msg: "empty model file".into(),
            });
        }
        weights.validate()?;
        let vocabulary: HashSet<String> = forward.grams[0].keys().cloned().collect();
        if vocabulary.is_empty() {
            return Err(FourGramError::EmptyCorpus);
        }
        forward.rebuild_contexts();
        backward.rebuild_contexts();
        Ok(Self {
            weights,
            forward,
            backward,
            vocabulary,
        })
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, FourGramError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }
}

impl ContextScorer for FourGramModel {
    fn score(&self, query: &MaskedQuery) -> Result<ScoreDistribution, ScoreError> {
        let raw: HashMap<String, f64> = query
            .vocabulary()
            .iter()
            .map(|w| (w.clone(), self.raw_score(query, w)))
            .collect();
        ScoreDistribution::from_raw(query.vocabulary(), &raw)
    }

    fn backend(&self) -> &'static str {
        "fourgram"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn query(s: &str, mask: usize, vocab: &[&str]) -> MaskedQuery {
        MaskedQuery::new(sent(s), mask, vocab.iter().map(|w| w.to_string()).collect()).unwrap()
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            train_fourgram(Vec::<Vec<String>>::new(), FourGramWeights::default()),
            Err(FourGramError::EmptyCorpus)
        ));
        assert!(matches!(
            train_fourgram(vec![vec![]], FourGramWeights::default()),
            Err(FourGramError::EmptyCorpus)
        ));
    }

    #[test]
    fn invalid_weights_rejected() {
        let w = FourGramWeights {
            per_order: [0.5; 4],
            ..Default::default()
        };
        assert!(train_fourgram(vec![sent("a")], w).is_err());
        let w = FourGramWeights {
            smoothing: 0.0,
            ..Default::default()
        };
        assert!(train_fourgram(vec![sent("a")], w).is_err());
    }

    #[test]
    fn repeated_sentence_singleton_support() {
        let m = train_fourgram(vec![sent("a b c"); 5], FourGramWeights::default()).unwrap();
        let d = m.score(&query("a b c", 1, &["b"])).unwrap();
        assert_eq!(d.get("b"), Some(1.0));
    }

    /// Two sentences differing in the middle word: by symmetry the masked
    /// position splits evenly.
    #[test]
    fn symmetric_split() {
        let m = train_fourgram(
            vec![sent("a b c"), sent("a x c")],
            FourGramWeights::default(),
        )
        .unwrap();
        let d = m.score(&query("a ? c", 1, &["b", "x"])).unwrap();
        assert!((d.get("b").unwrap() - 0.5).abs() < 1e-12);
    }

    /// Hand-computed: corpus "a b c" x3 and "a x c" x1, mask the middle.
    /// V = 4 known words + 1. In both directions every order has context
    /// count 4 and continuation counts b=3, x=1 (the unigram context count
    /// is the 12 targets, with b=3, x=1).
    #[test]
    fn relative_frequency_split() {
        let mut corpus = vec![sent("a b c"); 3];
        corpus.push(sent("a x c"));
        let m = train_fourgram(corpus, FourGramWeights::default()).unwrap();
        let k = 0.01;
        let v = 5.0;
        let high = |c: f64| (c + k) / (4.0 + k * v);
        let uni = |c: f64| (c + k) / (12.0 + k * v);
        let interp = |c: f64| 0.1 * uni(c) + 0.2 * high(c) + 0.3 * high(c) + 0.4 * high(c);
        let expected_b = interp(3.0) / (interp(3.0) + interp(1.0));
        let d = m.score(&query("a ? c", 1, &["b", "x"])).unwrap();
        assert!((d.get("b").unwrap() - expected_b).abs() < 1e-12);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_context_beats_unseen() {
        let m = train_fourgram(
            vec![sent("p q r s t"), sent("p q r u t"), sent("z z z")],
            FourGramWeights::default(),
        )
        .unwrap();
        let q = query("p q r s t", 3, &["s", "never"]);
        assert!(m.raw_score(&q, "s") > m.raw_score(&q, "never"));
    }

    #[test]
    fn save_load_round_trip() {
        let mut corpus = vec![sent("a b c d e"); 2];
        corpus.push(sent("a x c"));
        let w = FourGramWeights {
            forward_weight: 0.25,
            ..Default::default()
        };
        let m = train_fourgram(corpus, w).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let loaded = FourGramModel::load(&buf[..]).unwrap();
        assert_eq!(loaded, m);
        let q = query("a b c d e", 2, &["c", "x", "b"]);
        assert_eq!(loaded.score(&q).unwrap(), m.score(&q).unwrap());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("#spellkit-fourgram v1\n#weights 1=0.1 2=0.2 3=0.3 4=0.4\n"));
        assert!(text.contains("[forward 4]\n<s> <s> <s> a\t3\n"));
    }

    #[test]
    fn load_rejects_garbage() {
        assert!(FourGramModel::load(&b""[..]).is_err());
        assert!(FourGramModel::load(&b"hello\n"[..]).is_err());
        let bad = "#spellkit-fourgram v1\n[forward 2]\na\t1\n";
        assert!(matches!(
            FourGramModel::load(bad.as_bytes()),
            Err(FourGramError::Parse { line: 3, .. })
        ));
    }
}
