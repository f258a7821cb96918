#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use spellkit_cli::config::{build_engine, EngineConfig};
use spellkit_cli::AppState;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("tests/fixtures").join(name)
}

pub fn engine_config() -> EngineConfig {
    EngineConfig::load(&fixture("engine.toml")).expect("fixture engine config")
}

pub fn app_state() -> AppState {
    let cfg = engine_config();
    AppState::new(Arc::new(build_engine(&cfg).expect("fixture engine")), &cfg)
}

pub fn schema(name: &str) -> serde_json::Value {
    let p = crate_dir()
        .join("schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_str(
        &std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display())),
    )
    .expect("schema is JSON")
}

pub fn assert_valid(schema_name: &str, instance: &serde_json::Value) {
    let s = schema(schema_name);
    let compiled =
        jsonschema::JSONSchema::compile(&s).unwrap_or_else(|e| panic!("{schema_name}: {e}"));
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    assert!(
        msgs.is_empty(),
        "{schema_name} rejected {instance}: {msgs:?}"
    );
}

pub fn assert_invalid(schema_name: &str, instance: &serde_json::Value) {
    let s = schema(schema_name);
    let compiled = jsonschema::JSONSchema::compile(&s).unwrap();
    assert!(
        !compiled.is_valid(instance),
        "{schema_name} accepted {instance}"
    );
}

/// Compare bytes with a golden file; `UPDATE_GOLDEN=1` rewrites it.
pub fn assert_golden(name: &str, actual: &[u8]) {
    let p: &Path = &crate_dir().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(p, actual).unwrap();
        return;
    }
    let expected = std::fs::read(p)
        .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", p.display()));
    assert!(
        expected == actual,
        "{name} differs from golden\nexpected: {}\nactual:   {}",
        String::from_utf8_lossy(&expected),
        String::from_utf8_lossy(actual)
    );
}

pub const GOLDEN_TEXT: &str =
    "در سمت چپ توده اینترارکتال دیده شد. در محل بررسی مایغ مشاهده نشد. كبد در اندازه نرمال است.";
