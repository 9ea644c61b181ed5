//! Deterministic result serialization: CSV tables with 17-significant-digit
//! scientific notation, an optional JSON mirror of each table, and free-form
//! JSON summaries.  Every emitted file is content-hashed for the manifest.

use crate::CliError;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One table cell.  Floats are rendered in scientific notation; NaN marks a
/// recorded per-row failure and becomes `null` in the JSON mirror.
#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => {
                debug_assert!(!s.contains(','), "cell text may not contain commas");
                s.clone()
            }
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A named table with a header row.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }
}

/// Collects output files under one directory and records their hashes.
pub struct OutputWriter {
    dir: PathBuf,
    write_csv: bool,
    write_json: bool,
    files: Vec<(String, String)>,
}

impl OutputWriter {
    pub fn new(dir: &Path, write_csv: bool, write_json: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::numeric(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            write_csv,
            write_json,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::numeric(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").expect("infallible");
        }
        self.files.push((name.to_string(), hex));
        Ok(())
    }

    /// Writes the table as `<name>.csv` and/or mirrors it as `<name>.json`,
    /// according to the configured formats.
    pub fn write_table(&mut self, table: &Table) -> Result<(), CliError> {
        if self.write_csv {
            let mut text = table.columns.join(",");
            text.push('\n');
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(Cell::csv).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            self.emit(&format!("{}.csv", table.name), text.as_bytes())?;
        }
        if self.write_json {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            let doc = json!({ "columns": table.columns, "rows": rows });
            self.write_json_value(&format!("{}.json", table.name), &doc)?;
        }
        Ok(())
    }

    /// Writes a free-form JSON document (fit summaries, manifests).
    pub fn write_json_value(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.emit(name, &bytes)
    }

    /// Hashed (name, sha256) pairs of everything written so far.
    pub fn file_hashes(&self) -> &[(String, String)] {
        &self.files
    }
}
