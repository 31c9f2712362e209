//! Deterministic CSV and JSON writers with a provenance block.

use crate::config::RunConfig;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const VERSION: &str = concat!("rydqc ", env!("CARGO_PKG_VERSION"));

/// A table with the independent variable in the first column.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form, so reruns reproduce the file byte for byte.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn config_hash(config: &RunConfig) -> String {
    let canonical = json!({ "command": config.command, "config": config.to_json() });
    let digest = Sha256::digest(serde_json::to_string(&canonical).expect("json").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn provenance(config: &RunConfig) -> Value {
    json!({
        "config_sha256": config_hash(config),
        "seed": config.int("seed"),
        "version": VERSION,
    })
}

/// Writes `<command>.csv` and `<command>.json` into `out` and returns their paths.
pub fn write_outputs(
    out: &Path,
    config: &RunConfig,
    table: &Table,
    results: Value,
    units: Value,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let csv_path = out.join(format!("{}.csv", config.command));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    let summary = json!({
        "command": config.command,
        "provenance": provenance(config),
        "config": config.to_json(),
        "units": units,
        "results": results,
        "data_file": csv_path.file_name().and_then(|s| s.to_str()),
    });
    let json_path = out.join(format!("{}.json", config.command));
    let mut text = serde_json::to_string_pretty(&summary).expect("json");
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok(vec![csv_path, json_path])
}
