//! Deterministic CSV (and optional JSON) emission.
//!
//! Every file starts with a `# key: value` metadata block (version,
//! command, resolved config, seed, tolerances), followed by a header row
//! and data rows with 17 significant digits. No timestamps or other
//! non-reproducible content: identical config and seed give identical
//! bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{emit, OutputFormat, RunConfig};
use crate::CliError;

pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `# key: value` lines specific to the command.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config: &RunConfig) -> String {
        let mut out = String::new();
        out.push_str(&format!("# nisim {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", self.command));
        for line in emit(config).lines() {
            out.push_str("# config: ");
            out.push_str(line);
            out.push('\n');
        }
        for (key, value) in &self.notes {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let notes: serde_json::Map<String, serde_json::Value> = self
            .notes
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let value = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": emit(config).trim_end().split('\n').collect::<Vec<_>>(),
            "notes": notes,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut text = serde_json::to_string_pretty(&value).expect("json serialization");
        text.push('\n');
        text
    }

    /// Writes the CSV (and the JSON sibling when configured) and returns
    /// the paths written.
    pub fn write(&self, path: &Path, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
        let mut written = vec![path.to_path_buf()];
        fs::write(path, self.to_csv(config))
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
        if config.output_format == OutputFormat::CsvJson {
            let json_path = path.with_extension("json");
            fs::write(&json_path, self.to_json(config)).map_err(|e| {
                CliError::validation(format!("cannot write {}: {e}", json_path.display()))
            })?;
            written.push(json_path);
        }
        Ok(written)
    }
}
