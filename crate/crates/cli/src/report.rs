use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Tabular rows plus provenance.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub config: Value,
    pub summary: Value,
    /// Every measured quantity respected its bound.
    pub conformant: bool,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&str], config: &impl Serialize) -> Self {
        Self {
            command,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            config: serde_json::to_value(config).expect("configs serialize"),
            summary: Value::Null,
            conformant: true,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Provenance sidecar. `generated_unix` is the only field that varies
    /// between identical runs.
    pub fn sidecar(&self) -> Value {
        let generated = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        json!({
            "command": self.command,
            "version": pfaffnet_core::VERSION,
            "generated_unix": generated,
            "config": self.config,
            "columns": self.columns,
            "rows": self.rows.len(),
            "conformant": self.conformant,
            "summary": self.summary,
        })
    }

    /// Writes `<out>` and its `.json` sidecar, or prints the CSV to stdout
    /// and the sidecar to stderr.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let sidecar = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        match out {
            Some(path) => {
                std::fs::write(path, self.csv())?;
                std::fs::write(sidecar_path(path), sidecar + "\n")?;
            }
            None => {
                print!("{}", self.csv());
                eprintln!("{sidecar}");
            }
        }
        Ok(())
    }
}

/// `report.csv` → `report.json`; other names get `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "csv") {
        path.with_extension("json")
    } else {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}
