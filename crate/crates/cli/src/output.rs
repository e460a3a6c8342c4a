//! Deterministic table output: CSV with a comment header recording the
//! config hash and seed, or a structured JSON mirror of the same rows.

use std::io::Write;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra comment lines appended after the hash line (verdicts, notes).
    pub comments: Vec<String>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<&'static str>) -> Self {
        Table {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
            comments: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self, config_hash: &str, seed: u64) -> String {
        let mut out = format!("# table={} config_sha256={config_hash} seed={seed}\n", self.name);
        for comment in &self.comments {
            out.push_str("# ");
            out.push_str(comment);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self, config_hash: &str, seed: u64) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), json_value(v)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "table": self.name,
            "config_sha256": config_hash,
            "seed": seed,
            "comments": self.comments,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
        text.push('\n');
        text
    }

    fn render(&self, format: Format, config_hash: &str, seed: u64) -> String {
        match format {
            Format::Csv => self.to_csv(config_hash, seed),
            Format::Json => self.to_json(config_hash, seed),
        }
    }
}

/// Writes tables to stdout, or to `<out>/<table>.<ext>` when an output
/// directory is given.
pub fn emit(
    tables: &[Table],
    format: Format,
    out_dir: Option<&Path>,
    config_hash: &str,
    seed: u64,
) -> Result<(), CliError> {
    match out_dir {
        None => {
            let mut stdout = std::io::stdout().lock();
            for table in tables {
                stdout
                    .write_all(table.render(format, config_hash, seed).as_bytes())
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            for table in tables {
                let path = dir.join(format!("{}.{ext}", table.name));
                std::fs::write(&path, table.render(format, config_hash, seed))
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(())
        }
    }
}

pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

/// Numeric-looking cells become JSON numbers (integers preferred), anything
/// else stays a string.
fn json_value(cell: &str) -> serde_json::Value {
    let numeric_shape = cell.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-');
    if numeric_shape {
        if let Ok(n) = cell.parse::<i64>() {
            return serde_json::json!(n);
        }
        if let Ok(x) = cell.parse::<f64>() {
            return serde_json::json!(x);
        }
    }
    serde_json::json!(cell)
}
