//! Long-format tables written as CSV or JSON, re-read after writing, plus
//! the run manifest that accompanies every data file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, Format};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Missing => String::new(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format_float(*x),
            Cell::Float(_) | Cell::Missing => "null".into(),
        }
    }
}

/// 17 significant digits, enough to reproduce every f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    fn render_json(&self) -> String {
        let keys: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::to_string(c).expect("strings serialize"))
            .collect();
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (k, (key, cell)) in keys.iter().zip(row).enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(key);
                out.push_str(": ");
                out.push_str(&cell.json_value());
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    /// Re-parses `text` and checks it reproduces this table exactly.
    pub fn validate(&self, text: &str, format: Format) -> Result<(), CliError> {
        let parsed = match format {
            Format::Csv => parse_csv(text)?,
            Format::Json => parse_json(text, &self.columns)?,
        };
        if parsed.0 != self.columns {
            return Err(CliError::Validation(format!("header mismatch: {:?}", parsed.0)));
        }
        if parsed.1.len() != self.rows.len() {
            return Err(CliError::Validation(format!(
                "expected {} rows, found {}",
                self.rows.len(),
                parsed.1.len()
            )));
        }
        for (r, (row, fields)) in self.rows.iter().zip(&parsed.1).enumerate() {
            for (cell, field) in row.iter().zip(fields) {
                let ok = match cell {
                    Cell::Text(s) => field == s,
                    Cell::Int(i) => field.parse::<i64>().ok() == Some(*i),
                    Cell::Float(x) if x.is_finite() => field.parse::<f64>().ok() == Some(*x),
                    Cell::Float(_) | Cell::Missing => field.is_empty() || field == "null",
                };
                if !ok {
                    return Err(CliError::Validation(format!("row {r}: field {field:?} does not match {cell:?}")));
                }
            }
        }
        Ok(())
    }
}

type Parsed = (Vec<String>, Vec<Vec<String>>);

fn parse_csv(text: &str) -> Result<Parsed, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::Validation(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Validation(e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn parse_json(text: &str, columns: &[String]) -> Result<Parsed, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
    let array = value
        .as_array()
        .ok_or_else(|| CliError::Validation("top level is not an array".into()))?;
    let mut rows = Vec::with_capacity(array.len());
    for obj in array {
        let obj = obj
            .as_object()
            .ok_or_else(|| CliError::Validation("row is not an object".into()))?;
        if obj.len() != columns.len() {
            return Err(CliError::Validation(format!("row has {} keys", obj.len())));
        }
        let mut fields = Vec::with_capacity(columns.len());
        for c in columns {
            let v = obj
                .get(c)
                .ok_or_else(|| CliError::Validation(format!("missing key {c}")))?;
            fields.push(match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            });
        }
        rows.push(fields);
    }
    Ok((columns.to_vec(), rows))
}

/// Written next to every data file as `<file>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub output: PathBuf,
    pub format: Format,
    pub rows: usize,
    pub duration_seconds: f64,
    pub config: Config,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the table, re-reads and validates it, then writes the manifest.
pub fn write_outputs(table: &Table, path: &Path, format: Format, manifest: &RunManifest) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    let text = table.render(format);
    fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let back = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    table.validate(&back, format)?;

    let manifest_file = manifest_path(path);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&manifest_file, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", manifest_file.display())))?;
    let back = fs::read_to_string(&manifest_file)?;
    serde_json::from_str::<serde_json::Value>(&back).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(())
}
