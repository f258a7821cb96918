#![allow(dead_code)]

use std::sync::OnceLock;

use spellkit_core::evalharness::{inject_errors, InjectionSpec, SynthConfig, SyntheticCorpus};
use spellkit_core::scorer::{train_fourgram, FourGramWeights};
use spellkit_core::{DetectorConfig, Engine, FourGramModel, Normalizer, PertoTable};

pub struct World {
    pub corpus: SyntheticCorpus,
    pub engine: Engine,
    pub model: FourGramModel,
    pub clean: Vec<String>,
    pub corrupted: Vec<String>,
}

pub fn model_for(corpus: &SyntheticCorpus, n: usize, seed: u64) -> FourGramModel {
    let train = corpus.sentences(n, seed);
    train_fourgram(
        train
            .iter()
            .map(|s| s.split(' ').map(str::to_string).collect()),
        FourGramWeights::default(),
    )
    .unwrap()
}

/// A small synthetic corpus, a four-gram engine trained on it and a held-out
/// set with one injected error in most sentences.
pub fn world() -> &'static World {
    static W: OnceLock<World> = OnceLock::new();
    W.get_or_init(|| {
        let corpus = SyntheticCorpus::generate(SynthConfig {
            base_words: 150,
            templates: 120,
            ..SynthConfig::default()
        });
        let model = model_for(&corpus, 4000, 3);
        let engine = Engine::build(
            Normalizer::default(),
            corpus.lexicon(),
            PertoTable::default(),
            Box::new(model.clone()),
            DetectorConfig::default(),
        )
        .unwrap();
        let clean = corpus.sentences(1000, 4);
        let spec = InjectionSpec::default()
            .with_rates(6000.0, 3000.0)
            .with_seed(5);
        let out = inject_errors(&clean, &spec, &corpus.lexicon()).unwrap();
        World {
            corpus,
            engine,
            model,
            clean,
            corrupted: out.corrupted,
        }
    })
}
