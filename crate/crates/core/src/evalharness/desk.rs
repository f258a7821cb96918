use serde::{Deserialize, Serialize};

use super::{
    evaluate_subset, report, Configuration, Entry, EvalError, GoldRecord, InjectionSpec, Injector,
    Prediction, Report, SynthConfig, SyntheticCorpus, Task,
};
use crate::detector::DetectorConfig;
use crate::editops::EditType;
use crate::normalizer::Normalizer;
use crate::perto::PertoTable;
use crate::pipeline::{CheckOptions, Engine, SentenceReport};
use crate::scorer::{train_fourgram, FourGramWeights};

/// End-to-end benchmark on a synthetic corpus with the four-gram scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeskConfig {
    pub synth: SynthConfig,
    pub train_sentences: usize,
    pub test_sentences: usize,
    pub train_seed: u64,
    pub test_seed: u64,
    pub injection: InjectionSpec,
    pub detector: DetectorConfig,
    pub weights: FourGramWeights,
    pub threads: usize,
}

impl Default for DeskConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            train_sentences: 20_000,
            test_sentences: 4_000,
            train_seed: 11,
            test_seed: 12,
            injection: InjectionSpec::default()
                .with_rates(1_000.0, 500.0)
                .with_seed(13),
            detector: DetectorConfig::default(),
            weights: FourGramWeights::default(),
            threads: std::thread::available_parallelism()
                .map_or(1, |n| n.get())
                .min(8),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeskResult {
    pub gold: Vec<GoldRecord>,
    pub skipped: usize,
    pub entries: Vec<Entry>,
    pub report: Report,
    pub predictions_perto_off: Vec<Prediction>,
    pub predictions_perto_on: Vec<Prediction>,
}

impl DeskResult {
    pub fn metrics(
        &self,
        task: Task,
        perto: bool,
        subset: Option<&str>,
    ) -> Option<&super::Metrics> {
        self.entries
            .iter()
            .find(|e| {
                e.task == task && e.configuration.perto == perto && e.subset.as_deref() == subset
            })
            .map(|e| &e.metrics)
    }
}

/// Check each line as one sentence, in parallel, preserving order.
pub fn check_lines<S: AsRef<str> + Sync>(
    engine: &Engine,
    lines: &[S],
    opts: &CheckOptions,
    threads: usize,
) -> Result<Vec<Option<SentenceReport>>, EvalError> {
    engine
        .effective(opts)
        .map_err(|e| EvalError::Spec(e.to_string()))?;
    let threads = threads.max(1);
    let chunk = lines.len().div_ceil(threads).max(1);
    let mut out: Vec<Option<SentenceReport>> = Vec::with_capacity(lines.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = lines
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                scope.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, l)| {
                            engine
                                .check_line(l.as_ref(), c * chunk + i, opts)
                                .expect("options validated")
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    Ok(out)
}

pub fn run_desk_benchmark(cfg: &DeskConfig) -> Result<DeskResult, EvalError> {
    let corpus = SyntheticCorpus::generate(cfg.synth.clone());
    let lexicon = corpus.lexicon();
    let train = corpus.sentences(cfg.train_sentences, cfg.train_seed);
    let test = corpus.sentences(cfg.test_sentences, cfg.test_seed);

    let injector = Injector::new(cfg.injection.clone(), &lexicon, PertoTable::default())?;
    let injected = injector.inject(&test);

    let model = train_fourgram(
        train
            .iter()
            .map(|s| s.split(' ').map(str::to_string).collect()),
        cfg.weights,
    )
    .map_err(|e| EvalError::Spec(e.to_string()))?;
    let engine = Engine::build(
        Normalizer::default(),
        lexicon.clone(),
        PertoTable::default(),
        Box::new(model),
        cfg.detector,
    )
    .map_err(|e| EvalError::Spec(e.to_string()))?;

    let mut entries = Vec::new();
    let mut preds = [Vec::new(), Vec::new()];
    for perto in [false, true] {
        let opts = CheckOptions {
            perto: Some(perto),
            ..Default::default()
        };
        let reports = check_lines(&engine, &injected.corrupted, &opts, cfg.threads)?;
        let p: Vec<Prediction> = reports
            .iter()
            .flatten()
            .filter_map(Prediction::from_report)
            .collect();
        let configuration = Configuration::new("fourgram", perto);
        for task in Task::ALL {
            for subset in [None, Some(EditType::Substitution)] {
                entries.push(Entry {
                    configuration: configuration.clone(),
                    task,
                    subset: subset.map(|t| t.to_string()),
                    metrics: evaluate_subset(&p, &injected.gold, task, subset)?,
                });
            }
        }
        preds[usize::from(perto)] = p;
    }
    let report = report(&entries);
    let [predictions_perto_off, predictions_perto_on] = preds;
    Ok(DeskResult {
        gold: injected.gold,
        skipped: injected.skipped,
        entries,
        report,
        predictions_perto_off,
        predictions_perto_on,
    })
}
