//! Output plumbing shared by all commands. Every artifact carries the
//! configuration that produced it: CSV gets a `# config:` header line, JSON
//! reports a top-level `config` field, JSONL a leading `{"_config": ...}`
//! line, SVG a comment, and model files an extra `config` key that readers
//! ignore.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub fn compact_json(cfg: &impl Serialize) -> String {
    serde_json::to_string(cfg).expect("configuration serializes")
}

pub fn csv_with_config(cfg: &impl Serialize, body: &str) -> String {
    format!("# config: {}\n{body}", compact_json(cfg))
}

pub fn json_with_config(cfg: &impl Serialize, report: Value) -> String {
    let wrapped = serde_json::json!({
        "config": cfg,
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&wrapped).expect("report serializes");
    text.push('\n');
    text
}

pub fn svg_with_config(cfg: &impl Serialize, svg: &str) -> String {
    format!("<!-- config: {} -->\n{svg}", compact_json(cfg))
}

/// Writes to `out` when given, otherwise prints to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// One corrupted chunk: the clean tokens and their noisy rendering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptRecord {
    pub id: String,
    pub chunk_index: u32,
    #[serde(rename = "ref")]
    pub reference: String,
    pub noisy: String,
}

/// One decoded chunk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypRecord {
    pub id: String,
    pub chunk_index: u32,
    pub hyp: String,
}

/// Writes records as JSONL behind a `{"_config": ...}` header line.
pub fn write_jsonl<T: Serialize>(
    path: &Path,
    cfg: &impl Serialize,
    records: &[T],
) -> Result<(), CliError> {
    let mut text = format!("{}\n", compact_json(&serde_json::json!({ "_config": cfg })));
    for record in records {
        text.push_str(&serde_json::to_string(record)?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Reads a JSONL artifact, returning the embedded config (when present) and
/// the records. Line numbers are reported on parse failures.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<Value>, Vec<T>), CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut config = None;
    let mut records = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 0 {
            if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(line) {
                if let Some(cfg) = map.get("_config") {
                    config = Some(cfg.clone());
                    continue;
                }
            }
        }
        let record: T = serde_json::from_str(line)
            .map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        records.push(record);
    }
    Ok((config, records))
}
