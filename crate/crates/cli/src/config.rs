//! Engine configuration file (TOML) and engine construction.
//!
//! ```toml
//! normalizer = "normalization.toml"     # optional, bundled default otherwise
//! perto_table = "perto_table.toml"      # optional
//!
//! [lexicon]
//! paths = ["general.txt", "radiology.txt"]
//! index_cache = "lexicon.idx"           # optional
//!
//! [scorer.fourgram]                     # exactly one scorer table
//! model = "model.fgm"
//! # [scorer.remote]
//! # endpoint = "http://127.0.0.1:9000/score"
//! # timeout_ms = 10000
//! # max_in_flight = 8
//!
//! [detector]
//! max_dist = 2
//! margin = 1.0
//! top_k = 10
//! perto = true
//!
//! [service]
//! bind = "127.0.0.1:8080"
//! max_body_bytes = 1048576
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spellkit_core::editops::CandidateIndex;
use spellkit_core::scorer::{ContextScorer, FourGramModel, RemoteConfig, RemoteScorer};
use spellkit_core::{DetectorConfig, Engine, Lexicon, Normalizer, PertoTable};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconConfig {
    #[serde(default)]
    pub paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScorerConfig {
    Fourgram { model: PathBuf },
    Remote(RemoteConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub max_body_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            max_body_bytes: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perto_table: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: LexiconConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<ScorerConfig>,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub service: ServiceConfig,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl EngineConfig {
    pub fn from_toml(src: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: Self = toml::from_str(src).map_err(CliError::config)?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&src, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in self
            .normalizer
            .iter_mut()
            .chain(self.perto_table.iter_mut())
        {
            resolve(base, p);
        }
        for p in self
            .lexicon
            .paths
            .iter_mut()
            .chain(self.lexicon.index_cache.iter_mut())
        {
            resolve(base, p);
        }
        if let Some(ScorerConfig::Fourgram { model }) = &mut self.scorer {
            resolve(base, model);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.lexicon.paths.is_empty() {
            return Err(CliError::Config(
                "no lexicon configured (lexicon.paths or --lexicon)".into(),
            ));
        }
        if self.scorer.is_none() {
            return Err(CliError::Config(
                "no scorer configured (scorer.fourgram / scorer.remote or --model / --endpoint)"
                    .into(),
            ));
        }
        if let Some(ScorerConfig::Remote(r)) = &self.scorer {
            url::Url::parse(&r.endpoint)
                .map_err(|e| CliError::Config(format!("invalid endpoint: {e}")))?;
            if r.timeout_ms == 0 || r.max_in_flight == 0 {
                return Err(CliError::Config(
                    "timeout_ms and max_in_flight must be positive".into(),
                ));
            }
        }
        self.detector.validate().map_err(CliError::Config)?;
        if self.service.max_body_bytes == 0 {
            return Err(CliError::Config(
                "service.max_body_bytes must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The configuration with credentials and query strings removed from
    /// remote endpoints.
    pub fn redacted(&self) -> Self {
        let mut out = self.clone();
        if let Some(ScorerConfig::Remote(r)) = &mut out.scorer {
            r.endpoint = redact_url(&r.endpoint);
        }
        out
    }
}

pub fn redact_url(raw: &str) -> String {
    match url::Url::parse(raw) {
        Ok(mut u) => {
            if !u.username().is_empty() || u.password().is_some() {
                let _ = u.set_username("REDACTED");
                let _ = u.set_password(None);
            }
            if u.query().is_some() {
                u.set_query(Some("REDACTED"));
            }
            u.to_string()
        }
        Err(_) => "REDACTED".into(),
    }
}

pub fn load_normalizer(path: Option<&Path>) -> Result<Normalizer, CliError> {
    match path {
        Some(p) => Normalizer::from_config_path(p).map_err(CliError::config),
        None => Ok(Normalizer::default()),
    }
}

pub fn load_lexicon(paths: &[PathBuf], normalizer: &Normalizer) -> Result<Lexicon, CliError> {
    let mut lex = Lexicon::new();
    for p in paths {
        let next = Lexicon::load_path(p, normalizer).map_err(CliError::config)?;
        lex = Lexicon::merge(&lex, &next);
    }
    Ok(lex)
}

pub fn build_scorer(cfg: &ScorerConfig) -> Result<Box<dyn ContextScorer>, CliError> {
    Ok(match cfg {
        ScorerConfig::Fourgram { model } => Box::new(
            FourGramModel::load_path(model)
                .map_err(|e| CliError::Config(format!("{}: {e}", model.display())))?,
        ),
        ScorerConfig::Remote(r) => Box::new(RemoteScorer::new(r.clone())),
    })
}

pub fn build_engine(cfg: &EngineConfig) -> Result<Engine, CliError> {
    cfg.validate()?;
    let normalizer = load_normalizer(cfg.normalizer.as_deref())?;
    let table = match &cfg.perto_table {
        Some(p) => PertoTable::load(p).map_err(CliError::config)?,
        None => PertoTable::default(),
    };
    let lexicon = load_lexicon(&cfg.lexicon.paths, &normalizer)?;
    let depth = cfg.detector.max_dist;
    let index = match &cfg.lexicon.index_cache {
        Some(p) => CandidateIndex::load_or_build(p, &lexicon, depth).map_err(CliError::config)?,
        None => CandidateIndex::build(&lexicon, depth).map_err(CliError::config)?,
    };
    let scorer = build_scorer(cfg.scorer.as_ref().expect("validated"))?;
    Engine::new(normalizer, lexicon, index, table, scorer, cfg.detector).map_err(CliError::config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let src = r#"
[lexicon]
paths = ["a.txt", "/abs/b.txt"]
[scorer.fourgram]
model = "m.fgm"
[detector]
margin = 1.5
"#;
        let cfg = EngineConfig::from_toml(src, Path::new("/etc/sk")).unwrap();
        assert_eq!(
            cfg.lexicon.paths,
            vec![PathBuf::from("/etc/sk/a.txt"), PathBuf::from("/abs/b.txt")]
        );
        assert_eq!(
            cfg.scorer,
            Some(ScorerConfig::Fourgram {
                model: "/etc/sk/m.fgm".into()
            })
        );
        assert_eq!(cfg.detector.margin, 1.5);
        assert_eq!(cfg.detector.top_k, 10);
        cfg.validate().unwrap();
    }

    #[test]
    fn exactly_one_scorer() {
        let both = "[scorer.fourgram]\nmodel = \"m\"\n[scorer.remote]\nendpoint = \"http://x\"\n";
        assert!(EngineConfig::from_toml(both, Path::new(".")).is_err());
        let none = "[lexicon]\npaths = [\"a\"]\n";
        let cfg = EngineConfig::from_toml(none, Path::new(".")).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn redaction() {
        assert_eq!(
            redact_url("http://user:pw@host:9/score?key=abc"),
            "http://REDACTED@host:9/score?REDACTED"
        );
        assert_eq!(redact_url("http://host/score"), "http://host/score");
        assert_eq!(redact_url("not a url"), "REDACTED");
    }
}
