use std::path::Path;

use anyhow::{Context, Result};
use serde::{de::DeserializeOwned, Serialize};
use serde_json::Value;

/// One JSON document per invocation.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub subcommand: &'static str,
    pub version: &'static str,
    pub parameters: Value,
    pub outputs: Value,
}

impl RunRecord {
    pub fn new(subcommand: &'static str, parameters: &impl Serialize, outputs: &impl Serialize) -> Result<Self> {
        Ok(Self {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            parameters: serde_json::to_value(parameters)?,
            outputs: serde_json::to_value(outputs)?,
        })
    }
}

/// Writes a CSV with a header row; the first column is the abscissa.
pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    rd.deserialize()
        .enumerate()
        .map(|(k, r)| r.with_context(|| format!("{} row {}", path.display(), k + 2)))
        .collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a valid state document", path.display()))
}
