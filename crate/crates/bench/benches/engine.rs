use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use spellkit_core::evalharness::{inject_errors, InjectionSpec, SynthConfig, SyntheticCorpus};
use spellkit_core::scorer::{train_fourgram, FourGramWeights};
use spellkit_core::{
    osa_distance, CandidateIndex, CheckOptions, DetectorConfig, Engine, Normalizer, PertoTable,
};

struct Setup {
    corpus: SyntheticCorpus,
    engine: Engine,
    corrupted: Vec<String>,
}

fn setup() -> Setup {
    let corpus = SyntheticCorpus::generate(SynthConfig::default());
    let train = corpus.sentences(20_000, 11);
    let model = train_fourgram(
        train
            .iter()
            .map(|s| s.split(' ').map(str::to_string).collect()),
        FourGramWeights::default(),
    )
    .expect("model trains");
    let engine = Engine::build(
        Normalizer::default(),
        corpus.lexicon(),
        PertoTable::default(),
        Box::new(model),
        DetectorConfig::default(),
    )
    .expect("engine builds");
    let clean = corpus.sentences(200, 12);
    let spec = InjectionSpec::default()
        .with_rates(5_000.0, 2_000.0)
        .with_seed(13);
    let corrupted = inject_errors(&clean, &spec, &corpus.lexicon())
        .expect("injection")
        .corrupted;
    Setup {
        corpus,
        engine,
        corrupted,
    }
}

fn bench_osa(c: &mut Criterion) {
    let pairs = [
        ("مایع", "مایغ"),
        ("اینتراداکتال", "اینترارکتال"),
        ("هیپواکو", "هیپراکو"),
    ];
    c.bench_function("osa_distance", |b| {
        b.iter(|| {
            for (x, y) in pairs {
                black_box(osa_distance(black_box(x), black_box(y)));
            }
        })
    });
}

fn bench_perto(c: &mut Criterion) {
    let table = PertoTable::default();
    c.bench_function("perto_code", |b| {
        b.iter(|| black_box(table.code(black_box("اینتراداکتال"))))
    });
}

fn bench_candidates(c: &mut Criterion, s: &Setup) {
    let lex = s.corpus.lexicon();
    let mut g = c.benchmark_group("candidates");
    g.sample_size(10);
    g.bench_function("index_build_d2", |b| {
        b.iter(|| CandidateIndex::build(&lex, 2).unwrap())
    });
    let index = CandidateIndex::build(&lex, 2).unwrap();
    let queries: Vec<&String> = s.corpus.base_words().iter().take(100).collect();
    for d in [1, 2] {
        g.throughput(Throughput::Elements(queries.len() as u64));
        g.bench_with_input(BenchmarkId::new("query", d), &d, |b, &d| {
            b.iter(|| {
                for q in &queries {
                    black_box(index.candidates(q, d).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn bench_pipeline(c: &mut Criterion, s: &Setup) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.throughput(Throughput::Elements(s.corrupted.len() as u64));
    for perto in [false, true] {
        let opts = CheckOptions {
            perto: Some(perto),
            ..CheckOptions::default()
        };
        g.bench_with_input(
            BenchmarkId::new("check_200_sentences", perto),
            &opts,
            |b, opts| {
                b.iter(|| {
                    for line in &s.corrupted {
                        black_box(s.engine.check_line(line, 0, opts).unwrap());
                    }
                })
            },
        );
    }
    g.finish();
}

fn all(c: &mut Criterion) {
    let s = setup();
    bench_osa(c);
    bench_perto(c);
    bench_candidates(c, &s);
    bench_pipeline(c, &s);
}

criterion_group!(benches, all);
criterion_main!(benches);
