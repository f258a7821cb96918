//! Deterministic synthetic corpus for desk-scale benchmarks.
//!
//! Base words are random strings over the Persian letters of the PERTO
//! table. Every base word also gets lexicon neighbors for each edit type at
//! distance 1 (and, with some probability, distance 2), so both error
//! classes can be injected everywhere. Sentences are drawn from fixed
//! templates; some template slots alternate between a base word and one of
//! its neighbors, which gives the contextual scorer genuine confusions.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::editops::{classify_edit, osa_distance, EditType};
use crate::lexicon::Lexicon;
use crate::normalizer::Normalizer;
use crate::perto::PertoTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub base_words: usize,
    pub templates: usize,
    pub min_sentence_len: usize,
    pub max_sentence_len: usize,
    /// Probability that a template position alternates with a neighbor.
    pub confusable_slot_rate: f64,
    /// Weight of the base word in an alternating slot.
    pub majority_weight: f64,
    pub distance2_neighbor_rate: f64,
    pub visual_neighbor_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            base_words: 500,
            templates: 400,
            min_sentence_len: 5,
            max_sentence_len: 9,
            confusable_slot_rate: 0.15,
            majority_weight: 0.75,
            distance2_neighbor_rate: 0.5,
            visual_neighbor_rate: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Fixed(usize),
    Choice { majority: usize, minority: usize },
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    config: SynthConfig,
    words: Vec<String>,
    base_count: usize,
    templates: Vec<Vec<Slot>>,
}

fn edit_once(
    w: &mut Vec<char>,
    t: EditType,
    alphabet: &[char],
    table: &PertoTable,
    visual: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = w.len();
    match t {
        EditType::Substitution => {
            let p = rng.gen_range(0..n);
            let look = table.look_alikes(w[p]);
            w[p] = if !look.is_empty() && rng.gen_bool(visual) {
                *look.choose(rng).expect("non-empty")
            } else {
                *alphabet.choose(rng).expect("non-empty")
            };
        }
        EditType::Insertion => {
            let p = rng.gen_range(0..=n);
            w.insert(p, *alphabet.choose(rng).expect("non-empty"));
        }
        EditType::Deletion => {
            if n < 3 {
                return false;
            }
            w.remove(rng.gen_range(0..n));
        }
        EditType::Transposition => {
            if n < 2 {
                return false;
            }
            let p = rng.gen_range(0..n - 1);
            w.swap(p, p + 1);
        }
        EditType::Mixed => return false,
    }
    true
}

impl SyntheticCorpus {
    pub fn generate(config: SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let table = PertoTable::default();
        let mut alphabet: Vec<char> = table.characters().collect();
        alphabet.sort_unstable();
        alphabet.dedup();

        let norm = Normalizer::default();
        let stable = |w: &str| {
            let ctx = format!("ب {w} ب");
            norm.normalize(&ctx).content == ctx
        };

        let mut words: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        while words.len() < config.base_words {
            let len = rng.gen_range(3..=7);
            let w: String = (0..len)
                .map(|_| *alphabet.choose(&mut rng).expect("non-empty"))
                .collect();
            if stable(&w) && seen.insert(w.clone()) {
                words.push(w);
            }
        }
        let base_count = words.len();

        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); base_count];
        for (b, nbrs) in neighbors.iter_mut().enumerate() {
            let base: Vec<char> = words[b].chars().collect();
            for t in EditType::BASIC {
                for d in 1..=2usize {
                    if d == 2 && !rng.gen_bool(config.distance2_neighbor_rate) {
                        continue;
                    }
                    for _ in 0..20 {
                        let mut w = base.clone();
                        if !(0..d).all(|_| {
                            edit_once(
                                &mut w,
                                t,
                                &alphabet,
                                &table,
                                config.visual_neighbor_rate,
                                &mut rng,
                            )
                        }) {
                            continue;
                        }
                        let s: String = w.into_iter().collect();
                        let ok = osa_distance(&words[b], &s) == d
                            && classify_edit(&words[b], &s).ok() == Some(t)
                            && !seen.contains(&s)
                            && stable(&s);
                        if ok {
                            seen.insert(s.clone());
                            nbrs.push(words.len());
                            words.push(s);
                            break;
                        }
                    }
                }
            }
        }

        let mut templates = Vec::with_capacity(config.templates);
        for _ in 0..config.templates {
            let len = rng.gen_range(config.min_sentence_len..=config.max_sentence_len);
            let slots = (0..len)
                .map(|_| {
                    let b = rng.gen_range(0..base_count);
                    if rng.gen_bool(config.confusable_slot_rate) && !neighbors[b].is_empty() {
                        let minority = *neighbors[b].choose(&mut rng).expect("non-empty");
                        Slot::Choice {
                            majority: b,
                            minority,
                        }
                    } else {
                        Slot::Fixed(b)
                    }
                })
                .collect();
            templates.push(slots);
        }
        Self {
            config,
            words,
            base_count,
            templates,
        }
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn lexicon_words(&self) -> &[String] {
        &self.words
    }

    pub fn base_words(&self) -> &[String] {
        &self.words[..self.base_count]
    }

    pub fn lexicon(&self) -> Lexicon {
        Lexicon::from_words("synthetic", self.words.iter())
    }

    /// `n` sentences drawn uniformly over templates, one per line.
    pub fn sentences(&self, n: usize, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let t = self
                    .templates
                    .choose(&mut rng)
                    .expect("at least one template");
                let toks: Vec<&str> = t
                    .iter()
                    .map(|s| match *s {
                        Slot::Fixed(i) => self.words[i].as_str(),
                        Slot::Choice { majority, minority } => {
                            if rng.gen_bool(self.config.majority_weight) {
                                self.words[majority].as_str()
                            } else {
                                self.words[minority].as_str()
                            }
                        }
                    })
                    .collect();
                toks.join(" ")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::is_checkable_word;

    fn small() -> SynthConfig {
        SynthConfig {
            base_words: 60,
            templates: 20,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = SyntheticCorpus::generate(small());
        let b = SyntheticCorpus::generate(small());
        assert_eq!(a.lexicon_words(), b.lexicon_words());
        assert_eq!(a.sentences(50, 3), b.sentences(50, 3));
        assert_ne!(a.sentences(50, 3), a.sentences(50, 4));
    }

    #[test]
    fn sentences_are_normalized_lexicon_words() {
        let c = SyntheticCorpus::generate(small());
        let lex = c.lexicon();
        let norm = Normalizer::default();
        assert!(lex.len() > c.base_words().len() * 4);
        for s in c.sentences(200, 1) {
            assert_eq!(norm.normalize(&s).content, s);
            for w in s.split(' ') {
                assert!(lex.contains(w) && is_checkable_word(w), "{w}");
            }
        }
    }
}
