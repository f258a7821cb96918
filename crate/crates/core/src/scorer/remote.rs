//! HTTP adapter for an external masked-language-model scoring service.
//!
//! Wire contract (JSON over HTTP POST, see `docs/remote-scoring-protocol.md`):
//!
//! ```text
//! request:  {"tokens": ["w0", "[MASK]", "w2"], "mask_index": 1, "candidates": ["a", "b"]}
//! response: {"scores": {"a": 0.63, "b": 0.034}}    (HTTP 200)
//! ```
//!
//! The token at `mask_index` is always sent as `[MASK]`. Returned scores are
//! renormalized over the requested candidates.

use std::collections::HashMap;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ContextScorer, MaskedQuery, ScoreDistribution, ScoreError};

pub const MASK_TOKEN: &str = "[MASK]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_max_in_flight() -> usize {
    8
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout_ms: default_timeout_ms(),
            max_in_flight: default_max_in_flight(),
        }
    }
}

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    tokens: Vec<&'a str>,
    mask_index: usize,
    candidates: &'a [String],
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    scores: HashMap<String, f64>,
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(n: usize) -> Self {
        Self {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.available.lock().unwrap_or_else(|e| e.into_inner());
        *n += 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteScorer {
    config: RemoteConfig,
    agent: ureq::Agent,
    in_flight: InFlight,
}

impl std::fmt::Debug for RemoteScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteScorer")
            .field("config", &self.config)
            .finish()
    }
}

fn is_timeout(err: &ureq::Transport) -> bool {
    use std::error::Error;
    let mut source = err.source();
    while let Some(e) = source {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) {
                return true;
            }
        }
        source = e.source();
    }
    err.to_string().contains("timed out")
}

impl RemoteScorer {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        let in_flight = InFlight::new(config.max_in_flight);
        Self {
            config,
            agent,
            in_flight,
        }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn post(&self, query: &MaskedQuery) -> Result<HashMap<String, f64>, ScoreError> {
        let tokens = query
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if i == query.mask_index() {
                    MASK_TOKEN
                } else {
                    t.as_str()
                }
            })
            .collect();
        let body = WireRequest {
            tokens,
            mask_index: query.mask_index(),
            candidates: query.vocabulary(),
        };
        let _permit = self.in_flight.acquire();
        let resp = match self.agent.post(&self.config.endpoint).send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(ScoreError::Status { status, body });
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(if is_timeout(&t) {
                    ScoreError::Timeout
                } else {
                    ScoreError::Transport(t.to_string())
                });
            }
        };
        let text = resp.into_string().map_err(|e| {
            if matches!(
                e.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) {
                ScoreError::Timeout
            } else {
                ScoreError::Transport(e.to_string())
            }
        })?;
        let parsed: WireResponse =
            serde_json::from_str(&text).map_err(|e| ScoreError::Malformed(e.to_string()))?;
        Ok(parsed.scores)
    }
}

impl ContextScorer for RemoteScorer {
    fn score(&self, query: &MaskedQuery) -> Result<ScoreDistribution, ScoreError> {
        let raw = self.post(query)?;
        ScoreDistribution::from_raw(query.vocabulary(), &raw)
    }

    fn backend(&self) -> &'static str {
        "remote"
    }

    /// Sends a one-word probe query.
    fn health(&self) -> Result<(), ScoreError> {
        let probe = MaskedQuery::new(vec![MASK_TOKEN.into()], 0, vec!["probe".into()])?;
        self.score(&probe).map(|_| ())
    }
}
