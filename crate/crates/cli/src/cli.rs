use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spellkit_core::evalharness::{
    evaluate, read_gold, read_predictions, report, Configuration, Entry, InjectionSpec, Injector,
    Task,
};
use spellkit_core::normalizer::segment_sentences;
use spellkit_core::pipeline::{CheckOptions, DetectionView, SentenceError, SentenceReport};
use spellkit_core::scorer::{train_fourgram, FourGramWeights, MaskedQuery, RemoteConfig};
use spellkit_core::{CandidateIndex, Engine, Lexicon, PertoTable};

use crate::config::{
    build_engine, build_scorer, load_lexicon, load_normalizer, EngineConfig, ScorerConfig,
};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};
use crate::service::{self, AppState};

#[derive(Debug, Parser)]
#[command(
    name = "spellkit",
    version,
    about = "Persian clinical-text spelling detection and correction"
)]
pub struct Cli {
    /// Engine configuration file (TOML).
    #[arg(long, global = true, env = "SPELLKIT_CONFIG")]
    pub config: Option<PathBuf>,
    /// Diagnostics written to stderr.
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl LogLevel {
    fn as_tracing(self) -> tracing::Level {
        match self {
            LogLevel::Error => tracing::Level::ERROR,
            LogLevel::Warn => tracing::Level::WARN,
            LogLevel::Info => tracing::Level::INFO,
            LogLevel::Debug => tracing::Level::DEBUG,
            LogLevel::Trace => tracing::Level::TRACE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScorerArgs {
    /// Four-gram model file.
    #[arg(long, conflicts_with = "endpoint")]
    pub model: Option<PathBuf>,
    /// Remote masked-LM scoring endpoint.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Remote scorer request timeout.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EngineArgs {
    /// Lexicon word list; repeat to merge several.
    #[arg(long)]
    pub lexicon: Vec<PathBuf>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    /// Maximum edit distance of candidates (1 or 2).
    #[arg(long)]
    pub max_dist: Option<usize>,
    /// Real-word detection margin (>= 1.0).
    #[arg(long)]
    pub margin: Option<f64>,
    /// Candidates kept for ranking.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// PERTO gate during ranking.
    #[arg(long, value_enum)]
    pub perto: Option<Toggle>,
    /// Candidate index cache file.
    #[arg(long)]
    pub index_cache: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LexiconCommand {
    /// Build a lexicon from the distinct words of a corpus.
    Build {
        /// Corpus text file.
        #[arg(long)]
        from_corpus: PathBuf,
        /// Output word list.
        #[arg(long)]
        out: PathBuf,
    },
    /// Union of two lexicons.
    Merge {
        /// General lexicon.
        a: PathBuf,
        /// Specialized lexicon.
        b: PathBuf,
        /// Output word list.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize stdin to stdout.
    Normalize {
        /// Normalization rules file (TOML).
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Build or merge lexicon word lists.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Lexicon words within edit distance of WORD.
    Candidates {
        word: String,
        /// Lexicon word list; repeat to merge several.
        #[arg(long)]
        lexicon: Vec<PathBuf>,
        /// Maximum edit distance (1 or 2).
        #[arg(long, default_value_t = 2)]
        max_dist: usize,
        /// Candidate index cache file.
        #[arg(long)]
        index_cache: Option<PathBuf>,
    },
    /// PERTO code of each WORD.
    Perto {
        #[arg(required = true)]
        words: Vec<String>,
        /// PERTO table file (TOML).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Train a four-gram model from a corpus (one or more sentences per line).
    TrainFourgram {
        /// Training corpus.
        #[arg(long)]
        corpus: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        /// Weight of the left-context direction, in [0, 1].
        #[arg(long)]
        forward_weight: Option<f64>,
        /// Add-k smoothing constant.
        #[arg(long)]
        smoothing: Option<f64>,
    },
    /// Score candidate words at a masked position.
    Score {
        #[command(flatten)]
        scorer: ScorerArgs,
        /// Sentence text; tokenized after normalization.
        #[arg(long)]
        sentence: String,
        /// 0-based token index to mask.
        #[arg(long)]
        mask: usize,
        /// Comma-separated words to score.
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<String>,
    },
    /// Detect the first error of each sentence on stdin.
    Check {
        #[command(flatten)]
        engine: EngineArgs,
        /// Treat each input line as one sentence; sentence_id = line number (0-based).
        #[arg(long)]
        per_line: bool,
    },
    /// Detect and correct the first error of each sentence on stdin.
    Correct {
        #[command(flatten)]
        engine: EngineArgs,
        /// Treat each input line as one sentence; sentence_id = line number (0-based).
        #[arg(long)]
        per_line: bool,
    },
    /// Inject synthetic errors into a one-sentence-per-line corpus.
    Inject {
        /// Injection spec (TOML); defaults apply when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Clean corpus, one sentence per line.
        #[arg(long)]
        corpus: PathBuf,
        /// Corrupted corpus output.
        #[arg(long)]
        out_corpus: PathBuf,
        /// Gold records output (JSONL).
        #[arg(long)]
        out_gold: PathBuf,
        /// Overrides the spec's rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Lexicon word list; defaults to the engine config's lexicon.
        #[arg(long)]
        lexicon: Vec<PathBuf>,
    },
    /// Score predictions (output of `correct --per-line`) against gold records.
    Eval {
        /// Gold records (JSONL).
        #[arg(long)]
        gold: PathBuf,
        /// Predictions (JSONL).
        #[arg(long)]
        pred: PathBuf,
        /// Task(s) to score; defaults to all four.
        #[arg(long)]
        task: Vec<Task>,
        /// Configuration name shown in the report.
        #[arg(long, default_value = "system")]
        label: String,
        /// Report format.
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        engine: EngineArgs,
        /// Listen address; defaults to service.bind from the config.
        #[arg(long, env = "SPELLKIT_BIND")]
        bind: Option<String>,
    },
}

/// Parse `args`, run, and return the process exit code.
pub fn run_from<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let _ = tracing_subscriber::fmt()
        .with_max_level(cli.log_level.as_tracing())
        .with_writer(std::io::stderr)
        .try_init();
    match execute(cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "spellkit: {e}");
            e.exit_code()
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<EngineConfig, CliError> {
    match path {
        Some(p) => EngineConfig::load(p),
        None => Ok(EngineConfig::default()),
    }
}

fn apply_scorer_args(cfg: &mut EngineConfig, s: &ScorerArgs) {
    if let Some(m) = &s.model {
        cfg.scorer = Some(ScorerConfig::Fourgram { model: m.clone() });
    }
    if let Some(e) = &s.endpoint {
        cfg.scorer = Some(ScorerConfig::Remote(RemoteConfig::new(e.clone())));
    }
    if let (Some(t), Some(ScorerConfig::Remote(r))) = (s.timeout_ms, cfg.scorer.as_mut()) {
        r.timeout_ms = t;
    }
}

/// Config file values overridden by command-line flags.
pub fn resolve_engine_config(
    path: Option<&Path>,
    a: &EngineArgs,
) -> Result<EngineConfig, CliError> {
    let mut cfg = base_config(path)?;
    if !a.lexicon.is_empty() {
        cfg.lexicon.paths = a.lexicon.clone();
    }
    if a.index_cache.is_some() {
        cfg.lexicon.index_cache = a.index_cache.clone();
    }
    apply_scorer_args(&mut cfg, &a.scorer);
    let d = &mut cfg.detector;
    d.max_dist = a.max_dist.unwrap_or(d.max_dist);
    d.margin = a.margin.unwrap_or(d.margin);
    d.top_k = a.top_k.unwrap_or(d.top_k);
    if let Some(t) = a.perto {
        d.perto = t == Toggle::On;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_all(stdin: &mut dyn Read) -> Result<String, CliError> {
    let mut buf = Vec::new();
    stdin.read_to_end(&mut buf)?;
    String::from_utf8(buf).map_err(|e| {
        CliError::Runtime(format!(
            "input is not valid UTF-8 (byte offset {})",
            e.utf8_error().valid_up_to()
        ))
    })
}

fn write_json_line<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, v).map_err(CliError::runtime)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    sentence_id: usize,
    text: &'a str,
    detection: Option<&'a DetectionView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a SentenceError>,
}

fn empty_report(sentence_id: usize, text: &str) -> SentenceReport {
    SentenceReport {
        sentence_id,
        text: text.trim().to_string(),
        detections: Vec::new(),
        corrections: Vec::new(),
        error: None,
        corrected_text: text.to_string(),
    }
}

fn sentence_reports(
    engine: &Engine,
    input: &str,
    per_line: bool,
) -> Result<Vec<SentenceReport>, CliError> {
    let opts = CheckOptions::default();
    if per_line {
        input
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let r = engine
                    .check_line(line, i, &opts)
                    .map_err(CliError::config)?;
                Ok(r.unwrap_or_else(|| empty_report(i, line)))
            })
            .collect()
    } else {
        Ok(engine
            .run_pipeline(input, &opts)
            .map_err(CliError::config)?
            .sentences)
    }
}

fn execute(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Normalize { rules } => {
            let rules = match rules {
                Some(r) => Some(r),
                None => base_config(config_path)?.normalizer,
            };
            let n = load_normalizer(rules.as_deref())?;
            let mut buf = Vec::new();
            stdin.read_to_end(&mut buf)?;
            let out = n.normalize_bytes(&buf).map_err(CliError::runtime)?;
            stdout.write_all(out.content.as_bytes())?;
        }
        Command::Lexicon(LexiconCommand::Build { from_corpus, out }) => {
            let n = load_normalizer(base_config(config_path)?.normalizer.as_deref())?;
            let f = File::open(&from_corpus)
                .map_err(|e| CliError::Config(format!("{}: {e}", from_corpus.display())))?;
            let name = from_corpus
                .file_name()
                .map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
            let lex =
                Lexicon::from_corpus(&name, BufReader::new(f), &n).map_err(CliError::runtime)?;
            lex.write(BufWriter::new(File::create(&out)?))?;
            tracing::info!(entries = lex.len(), "lexicon written");
        }
        Command::Lexicon(LexiconCommand::Merge { a, b, out }) => {
            let n = load_normalizer(base_config(config_path)?.normalizer.as_deref())?;
            let la = load_lexicon(&[a], &n)?;
            let lb = load_lexicon(&[b], &n)?;
            Lexicon::merge(&la, &lb).write(BufWriter::new(File::create(&out)?))?;
        }
        Command::Candidates {
            word,
            lexicon,
            max_dist,
            index_cache,
        } => {
            let cfg = base_config(config_path)?;
            let paths = if lexicon.is_empty() {
                cfg.lexicon.paths.clone()
            } else {
                lexicon
            };
            if paths.is_empty() {
                return Err(CliError::Config("no lexicon given (--lexicon)".into()));
            }
            let n = load_normalizer(cfg.normalizer.as_deref())?;
            let lex = load_lexicon(&paths, &n)?;
            let index = match index_cache.or(cfg.lexicon.index_cache) {
                Some(p) => CandidateIndex::load_or_build(p, &lex, max_dist),
                None => CandidateIndex::build(&lex, max_dist),
            }
            .map_err(CliError::config)?;
            let word = n.normalize_word(&word);
            let cands = index
                .candidates(&word, max_dist)
                .map_err(CliError::runtime)?;
            for c in cands {
                write_json_line(
                    stdout,
                    &serde_json::json!({"word": c.word, "distance": c.distance, "edit_type": c.edit_type}),
                )?;
            }
        }
        Command::Perto { words, table } => {
            let cfg = base_config(config_path)?;
            let table = match table.or(cfg.perto_table) {
                Some(p) => PertoTable::load(&p).map_err(CliError::config)?,
                None => PertoTable::default(),
            };
            let n = load_normalizer(cfg.normalizer.as_deref())?;
            for w in words {
                let w = n.normalize_word(&w);
                writeln!(stdout, "{w}\t{}", table.code(&w))?;
            }
        }
        Command::TrainFourgram {
            corpus,
            out,
            forward_weight,
            smoothing,
        } => {
            let n = load_normalizer(base_config(config_path)?.normalizer.as_deref())?;
            let f = File::open(&corpus)
                .map_err(|e| CliError::Config(format!("{}: {e}", corpus.display())))?;
            let mut sentences = Vec::new();
            for line in BufReader::new(f).lines() {
                let line = n.normalize(&line?);
                sentences.extend(segment_sentences(&line).iter().map(|s| s.token_surfaces()));
            }
            let mut w = FourGramWeights::default();
            if let Some(fw) = forward_weight {
                w.forward_weight = fw;
            }
            if let Some(k) = smoothing {
                w.smoothing = k;
            }
            let model = train_fourgram(sentences, w).map_err(CliError::config)?;
            model.save_path(&out)?;
        }
        Command::Score {
            scorer,
            sentence,
            mask,
            candidates,
        } => {
            let mut cfg = base_config(config_path)?;
            apply_scorer_args(&mut cfg, &scorer);
            let sc = cfg.scorer.as_ref().ok_or_else(|| {
                CliError::Config("no scorer given (--model or --endpoint)".into())
            })?;
            let scorer = build_scorer(sc)?;
            let n = load_normalizer(cfg.normalizer.as_deref())?;
            let tokens = spellkit_core::normalizer::tokenize(&n.normalize(&sentence).content)
                .into_iter()
                .map(|t| t.surface)
                .collect();
            let vocab = candidates.iter().map(|c| n.normalize_word(c)).collect();
            let q = MaskedQuery::new(tokens, mask, vocab)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let dist = scorer.score(&q).map_err(CliError::runtime)?;
            let scores: serde_json::Map<String, serde_json::Value> = dist
                .iter()
                .map(|(w, s)| (w.to_string(), serde_json::json!(s)))
                .collect();
            write_json_line(stdout, &serde_json::json!({ "scores": scores }))?;
        }
        Command::Check { engine, per_line } => {
            let engine = build_engine(&resolve_engine_config(config_path, &engine)?)?;
            let input = read_all(stdin)?;
            for r in sentence_reports(&engine, &input, per_line)? {
                let rec = CheckRecord {
                    sentence_id: r.sentence_id,
                    text: &r.text,
                    detection: r.detections.first(),
                    error: r.error.as_ref(),
                };
                write_json_line(stdout, &rec)?;
            }
        }
        Command::Correct { engine, per_line } => {
            let engine = build_engine(&resolve_engine_config(config_path, &engine)?)?;
            let input = read_all(stdin)?;
            for r in sentence_reports(&engine, &input, per_line)? {
                write_json_line(stdout, &r)?;
            }
        }
        Command::Inject {
            spec,
            corpus,
            out_corpus,
            out_gold,
            seed,
            lexicon,
        } => {
            let cfg = base_config(config_path)?;
            let mut spec = match spec {
                Some(p) => InjectionSpec::load(&p).map_err(CliError::config)?,
                None => InjectionSpec::default(),
            };
            if let Some(s) = seed {
                spec.rng_seed = s;
            }
            let paths = if lexicon.is_empty() {
                cfg.lexicon.paths.clone()
            } else {
                lexicon
            };
            if paths.is_empty() {
                return Err(CliError::Config("no lexicon given (--lexicon)".into()));
            }
            let n = load_normalizer(cfg.normalizer.as_deref())?;
            let lex = load_lexicon(&paths, &n)?;
            let f = File::open(&corpus)
                .map_err(|e| CliError::Config(format!("{}: {e}", corpus.display())))?;
            let lines: Vec<String> = BufReader::new(f)
                .lines()
                .map(|l| l.map(|l| n.normalize(&l).content))
                .collect::<Result<_, _>>()?;
            let table = match &cfg.perto_table {
                Some(p) => PertoTable::load(p).map_err(CliError::config)?,
                None => PertoTable::default(),
            };
            let injector = Injector::new(spec, &lex, table).map_err(CliError::config)?;
            let out = injector.inject(&lines);
            out.write_corpus(BufWriter::new(File::create(&out_corpus)?))?;
            out.write_gold(BufWriter::new(File::create(&out_gold)?))?;
            tracing::info!(
                injected = out.gold.len(),
                skipped = out.skipped,
                "injection done"
            );
        }
        Command::Eval {
            gold,
            pred,
            task,
            label,
            format,
        } => {
            let open = |p: &Path| {
                File::open(p)
                    .map(BufReader::new)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            };
            let gold = read_gold(open(&gold)?).map_err(CliError::runtime)?;
            let preds = read_predictions(open(&pred)?).map_err(CliError::runtime)?;
            let tasks = if task.is_empty() {
                Task::ALL.to_vec()
            } else {
                task
            };
            let mut entries = Vec::new();
            for t in tasks {
                entries.push(Entry {
                    configuration: Configuration::new(label.clone(), false),
                    task: t,
                    subset: None,
                    metrics: evaluate(&preds, &gold, t).map_err(CliError::runtime)?,
                });
            }
            let r = report(&entries);
            let text = match format {
                ReportFormat::Text => r.to_text(),
                ReportFormat::Json => r.to_json() + "\n",
                ReportFormat::Csv => r.to_csv(),
            };
            stdout.write_all(text.as_bytes())?;
        }
        Command::Serve { engine, bind } => {
            let cfg = resolve_engine_config(config_path, &engine)?;
            let eng = Arc::new(build_engine(&cfg)?);
            let bind = bind.unwrap_or_else(|| cfg.service.bind.clone());
            let state = AppState::new(eng, &cfg);
            let rt = tokio::runtime::Runtime::new().map_err(CliError::runtime)?;
            rt.block_on(service::serve(state, &bind, cfg.service.max_body_bytes))
                .map_err(|e| CliError::Runtime(format!("serve on {bind}: {e}")))?;
        }
    }
    stdout.flush()?;
    Ok(())
}
