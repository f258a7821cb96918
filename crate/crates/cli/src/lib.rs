//! Command-line tool and HTTP service for the spellkit engine.

pub mod cli;
pub mod config;
pub mod error;
pub mod service;

pub use cli::{run_from, Cli};
pub use config::{build_engine, EngineConfig, ScorerConfig};
pub use error::CliError;
pub use service::{router, AppState};
