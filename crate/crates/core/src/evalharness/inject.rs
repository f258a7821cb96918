use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, InjectionSpec};
use crate::detector::ErrorClass;
use crate::editops::{
    classify_edit, osa_distance, CandidateIndex, EditType, MAX_SUPPORTED_DISTANCE,
};
use crate::lexicon::Lexicon;
use crate::normalizer::{is_checkable_word, Sentence};
use crate::perto::PertoTable;

/// Ground truth for one injected error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRecord {
    pub sentence_id: usize,
    pub token_index: usize,
    pub original: String,
    pub corrupted: String,
    pub error_class: ErrorClass,
    pub edit_type: EditType,
    pub distance: usize,
}

impl GoldRecord {
    /// Check the record against the lexicon and, when given, the clean and
    /// corrupted sentence lines.
    pub fn verify(&self, lex: &Lexicon, lines: Option<(&str, &str)>) -> Result<(), String> {
        let d = osa_distance(&self.original, &self.corrupted);
        if d != self.distance {
            return Err(format!("distance {d} != recorded {}", self.distance));
        }
        let t = classify_edit(&self.original, &self.corrupted).map_err(|e| e.to_string())?;
        if t != self.edit_type {
            return Err(format!("edit type {t} != recorded {}", self.edit_type));
        }
        if !lex.contains(&self.original) {
            return Err(format!("original {:?} not in lexicon", self.original));
        }
        let in_lex = lex.contains(&self.corrupted);
        match self.error_class {
            ErrorClass::NonWord if in_lex => {
                return Err("non-word corruption is in the lexicon".into())
            }
            ErrorClass::RealWord if !in_lex => {
                return Err("real-word corruption is not in the lexicon".into())
            }
            _ => {}
        }
        if let Some((clean, corrupted)) = lines {
            let s = Sentence::from_text(corrupted).ok_or("corrupted line has no tokens")?;
            let tok = s
                .tokens
                .get(self.token_index)
                .ok_or("token index out of range")?;
            if tok.surface != self.corrupted {
                return Err(format!(
                    "token {} is {:?}, expected {:?}",
                    self.token_index, tok.surface, self.corrupted
                ));
            }
            if s.with_replacement(self.token_index, &self.original) != clean {
                return Err("restoring the original does not reproduce the clean line".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionOutcome {
    pub corrupted: Vec<String>,
    pub gold: Vec<GoldRecord>,
    /// Sentences drawn for an error where no valid corruption was found.
    pub skipped: usize,
}

impl InjectionOutcome {
    pub fn write_corpus<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in &self.corrupted {
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    pub fn write_gold<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_gold(&self.gold, out)
    }
}

pub fn write_gold<W: Write>(gold: &[GoldRecord], mut out: W) -> std::io::Result<()> {
    for g in gold {
        serde_json::to_writer(&mut out, g)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_gold<R: BufRead>(reader: R) -> Result<Vec<GoldRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn draw<T: Copy, R: Rng>(rng: &mut R, weights: &[(T, f64)]) -> T {
    let mut u: f64 = rng.gen();
    for &(t, w) in weights {
        if u < w {
            return t;
        }
        u -= w;
    }
    weights.last().expect("non-empty weights").0
}

/// Seeded error injector. The generator is ChaCha8 seeded with
/// `seed_from_u64(spec.rng_seed)`; each sentence consumes draws in corpus
/// order, so output depends only on the seed, corpus, lexicon and spec.
pub struct Injector<'a> {
    spec: InjectionSpec,
    lex: &'a Lexicon,
    index: CandidateIndex,
    table: PertoTable,
    alphabet: Vec<char>,
}

impl<'a> Injector<'a> {
    pub fn new(
        spec: InjectionSpec,
        lex: &'a Lexicon,
        table: PertoTable,
    ) -> Result<Self, EvalError> {
        spec.validate()?;
        let index = CandidateIndex::build(lex, MAX_SUPPORTED_DISTANCE)
            .map_err(|e| EvalError::Spec(e.to_string()))?;
        let mut alphabet: Vec<char> = table.characters().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        Ok(Self {
            spec,
            lex,
            index,
            table,
            alphabet,
        })
    }

    pub fn spec(&self) -> &InjectionSpec {
        &self.spec
    }

    pub fn inject<S: AsRef<str>>(&self, corpus: &[S]) -> InjectionOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.rng_seed);
        let p_nw = self.spec.error_rate.non_word / 10_000.0;
        let p_rw = self.spec.error_rate.real_word / 10_000.0;
        let mut out = InjectionOutcome {
            corrupted: Vec::with_capacity(corpus.len()),
            gold: Vec::new(),
            skipped: 0,
        };
        for (sentence_id, line) in corpus.iter().enumerate() {
            let line = line.as_ref();
            let u: f64 = rng.gen();
            let class = if u < p_nw {
                ErrorClass::NonWord
            } else if u < p_nw + p_rw {
                ErrorClass::RealWord
            } else {
                out.corrupted.push(line.to_string());
                continue;
            };
            let edit_type = draw(&mut rng, &self.spec.type_mix.get(class).normalized());
            let distance = draw(&mut rng, &self.spec.distance_mix.get(class).normalized());
            let injected = Sentence::from_text(line)
                .and_then(|s| self.corrupt_sentence(&s, class, edit_type, distance, &mut rng));
            match injected {
                Some((token_index, original, corrupted, text)) => {
                    out.corrupted.push(text);
                    out.gold.push(GoldRecord {
                        sentence_id,
                        token_index,
                        original,
                        corrupted,
                        error_class: class,
                        edit_type,
                        distance,
                    });
                }
                None => {
                    tracing::warn!(sentence_id, %class, %edit_type, distance, "no valid corruption found; sentence skipped");
                    out.skipped += 1;
                    out.corrupted.push(line.to_string());
                }
            }
        }
        out
    }

    fn corrupt_sentence(
        &self,
        s: &Sentence,
        class: ErrorClass,
        edit_type: EditType,
        distance: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, String, String, String)> {
        let eligible: Vec<usize> = s
            .tokens
            .iter()
            .filter(|t| {
                t.is_checkable() && self.lex.contains(&t.surface) && t.surface.chars().count() >= 2
            })
            .map(|t| t.index)
            .collect();
        if eligible.is_empty() {
            return None;
        }
        for _ in 0..self.spec.max_attempts {
            let ti = *eligible.choose(rng).expect("non-empty");
            let original = &s.tokens[ti].surface;
            let corrupted = match class {
                ErrorClass::NonWord => self.nonword_variant(original, edit_type, distance, rng),
                ErrorClass::RealWord => self.realword_variant(original, edit_type, distance, rng),
            };
            let Some(corrupted) = corrupted else { continue };
            let text = s.with_replacement(ti, &corrupted);
            let stable = Sentence::from_text(&text).is_some_and(|c| {
                c.tokens.len() == s.tokens.len() && c.tokens[ti].surface == corrupted
            });
            if stable {
                return Some((ti, original.clone(), corrupted, text));
            }
        }
        None
    }

    fn random_letter(&self, rng: &mut ChaCha8Rng) -> char {
        *self.alphabet.choose(rng).expect("non-empty alphabet")
    }

    fn substitute(&self, c: char, rng: &mut ChaCha8Rng) -> char {
        let look_alikes = self.table.look_alikes(c);
        if !look_alikes.is_empty() && rng.gen_bool(self.spec.visual_substitution) {
            return *look_alikes.choose(rng).expect("non-empty");
        }
        loop {
            let r = self.random_letter(rng);
            if r != c {
                return r;
            }
        }
    }

    fn apply_edit(
        &self,
        word: &[char],
        edit_type: EditType,
        distance: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<char>> {
        let n = word.len();
        let mut w = word.to_vec();
        match edit_type {
            EditType::Substitution => {
                if n < distance {
                    return None;
                }
                let positions = rand::seq::index::sample(rng, n, distance);
                for p in positions.iter() {
                    w[p] = self.substitute(w[p], rng);
                }
            }
            EditType::Insertion => {
                for _ in 0..distance {
                    let p = rng.gen_range(0..=w.len());
                    let c = self.random_letter(rng);
                    w.insert(p, c);
                }
            }
            EditType::Deletion => {
                if n < distance + 2 {
                    return None;
                }
                for _ in 0..distance {
                    let p = rng.gen_range(0..w.len());
                    w.remove(p);
                }
            }
            EditType::Transposition => {
                let pairs: Vec<usize> = (0..n.saturating_sub(1))
                    .filter(|&i| w[i] != w[i + 1])
                    .collect();
                let first = *pairs.choose(rng)?;
                w.swap(first, first + 1);
                if distance == 2 {
                    let rest: Vec<usize> = pairs
                        .iter()
                        .copied()
                        .filter(|&j| j + 1 < first || j >= first + 2)
                        .collect();
                    let second = *rest.choose(rng)?;
                    w.swap(second, second + 1);
                }
            }
            EditType::Mixed => return None,
        }
        Some(w)
    }

    fn nonword_variant(
        &self,
        original: &str,
        edit_type: EditType,
        distance: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<String> {
        let chars: Vec<char> = original.chars().collect();
        let variant: String = self
            .apply_edit(&chars, edit_type, distance, rng)?
            .into_iter()
            .collect();
        let valid = !self.lex.contains(&variant)
            && is_checkable_word(&variant)
            && osa_distance(original, &variant) == distance
            && classify_edit(original, &variant).ok() == Some(edit_type);
        valid.then_some(variant)
    }

    fn realword_variant(
        &self,
        original: &str,
        edit_type: EditType,
        distance: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<String> {
        let neighbors: Vec<String> = self
            .index
            .candidates(original, distance)
            .ok()?
            .into_iter()
            .filter(|c| c.distance == distance && c.word != original && is_checkable_word(&c.word))
            .filter(|c| classify_edit(original, &c.word).ok() == Some(edit_type))
            .map(|c| c.word)
            .collect();
        if neighbors.is_empty() {
            return None;
        }
        if edit_type == EditType::Substitution {
            let visual: Vec<&String> = neighbors
                .iter()
                .filter(|w| self.table.matches(original, w))
                .collect();
            if !visual.is_empty() && rng.gen_bool(self.spec.visual_substitution) {
                return visual.choose(rng).map(|w| (*w).clone());
            }
        }
        neighbors.choose(rng).cloned()
    }
}

/// Inject errors into a normalized, one-sentence-per-line corpus.
pub fn inject_errors<S: AsRef<str>>(
    corpus: &[S],
    spec: &InjectionSpec,
    lex: &Lexicon,
) -> Result<InjectionOutcome, EvalError> {
    Ok(Injector::new(spec.clone(), lex, PertoTable::default())?.inject(corpus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::from_words(
            "t",
            [
                "کبد",
                "کند",
                "نرمال",
                "است",
                "طحال",
                "بزرگ",
                "بزرک",
                "اندازه",
                "دارد",
                "کلیه",
                "کلیة",
                "راست",
                "ارست",
            ],
        )
    }

    fn corpus() -> Vec<String> {
        let base = [
            "کبد نرمال است",
            "طحال بزرگ است",
            "کلیه راست اندازه نرمال دارد",
            "12 mm",
        ];
        (0..400).map(|i| base[i % base.len()].to_string()).collect()
    }

    #[test]
    fn zero_rate_is_identity() {
        let spec = InjectionSpec::default().with_rates(0.0, 0.0);
        let out = inject_errors(&corpus(), &spec, &lex()).unwrap();
        assert_eq!(out.corrupted, corpus());
        assert!(out.gold.is_empty());
    }

    #[test]
    fn records_verify_and_one_per_sentence() {
        let spec = InjectionSpec::default()
            .with_rates(5000.0, 3000.0)
            .with_seed(4);
        let c = corpus();
        let l = lex();
        let out = inject_errors(&c, &spec, &l).unwrap();
        assert!(out.gold.len() > 100);
        let mut seen = std::collections::HashSet::new();
        for g in &out.gold {
            assert!(seen.insert(g.sentence_id));
            g.verify(&l, Some((&c[g.sentence_id], &out.corrupted[g.sentence_id])))
                .unwrap();
        }
        for (i, (a, b)) in c.iter().zip(&out.corrupted).enumerate() {
            if !seen.contains(&i) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = InjectionSpec::default()
            .with_rates(3000.0, 2000.0)
            .with_seed(11);
        let a = inject_errors(&corpus(), &spec, &lex()).unwrap();
        let b = inject_errors(&corpus(), &spec, &lex()).unwrap();
        assert_eq!(a, b);
        let c = inject_errors(&corpus(), &spec.clone().with_seed(12), &lex()).unwrap();
        assert_ne!(a.gold, c.gold);
    }

    #[test]
    fn gold_jsonl_round_trip() {
        let spec = InjectionSpec::default()
            .with_rates(5000.0, 0.0)
            .with_seed(1);
        let out = inject_errors(&corpus(), &spec, &lex()).unwrap();
        let mut buf = Vec::new();
        out.write_gold(&mut buf).unwrap();
        assert_eq!(read_gold(&buf[..]).unwrap(), out.gold);
        assert!(matches!(
            read_gold(&b"{\"x\":1}\n"[..]),
            Err(EvalError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn verify_catches_tampering() {
        let l = lex();
        let g = GoldRecord {
            sentence_id: 0,
            token_index: 0,
            original: "کبد".into(),
            corrupted: "کند".into(),
            error_class: ErrorClass::RealWord,
            edit_type: EditType::Substitution,
            distance: 1,
        };
        g.verify(&l, Some(("کبد است", "کند است"))).unwrap();
        assert!(GoldRecord {
            distance: 2,
            ..g.clone()
        }
        .verify(&l, None)
        .is_err());
        assert!(GoldRecord {
            error_class: ErrorClass::NonWord,
            ..g.clone()
        }
        .verify(&l, None)
        .is_err());
        assert!(g.verify(&l, Some(("کبد است", "کبد است"))).is_err());
    }
}
