//! Tabular results and their CSV and JSON encodings.
//!
//! Reals are written in the shortest form that parses back to the same
//! `f64`. Infinities are the strings `inf` and `-inf`; absent values are
//! empty CSV fields and JSON `null`.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Missing,
    Integer(u64),
    Flag(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Real)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(v) => real_text(*v),
            Cell::Missing => String::new(),
            Cell::Integer(v) => v.to_string(),
            Cell::Flag(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(v) => real_json(*v),
            Cell::Missing => Value::Null,
            Cell::Integer(v) => Value::from(*v),
            Cell::Flag(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` for non-finite
/// values.
pub fn real_text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn real_json(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    } else {
        Value::String(real_text(v))
    }
}

/// One command's output.
///
/// `meta` entries appear as top-level JSON keys ahead of `rows`; CSV
/// output carries only the header and rows. A table without columns is a
/// single record: JSON holds just the `meta` keys and CSV writes them as
/// one header and one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub meta: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => Ok(self.json()),
        }
    }

    pub fn csv(&self) -> Result<String, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::io(format!("csv encoding failed: {e}"));
        if self.columns.is_empty() {
            writer
                .write_record(self.meta.iter().map(|(k, _)| *k))
                .map_err(fail)?;
            writer
                .write_record(self.meta.iter().map(|(_, c)| c.csv()))
                .map_err(fail)?;
        } else {
            writer.write_record(&self.columns).map_err(fail)?;
            for row in &self.rows {
                writer
                    .write_record(row.iter().map(Cell::csv))
                    .map_err(fail)?;
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::io(format!("csv encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::io(e.to_string()))
    }

    pub fn json(&self) -> String {
        let mut object = Map::new();
        object.insert("command".into(), Value::String(self.command.into()));
        for (key, cell) in &self.meta {
            object.insert((*key).into(), cell.json());
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let fields = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| ((*c).to_string(), cell.json()));
                Value::Object(fields.collect())
            })
            .collect();
        if !self.columns.is_empty() {
            object.insert("rows".into(), Value::Array(rows));
        }
        let mut text =
            serde_json::to_string_pretty(&Value::Object(object)).expect("json values serialize");
        text.push('\n');
        text
    }
}

/// Writes `content` to `path` through a temporary file in the same
/// directory and a rename, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(content.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(format!("cannot write standard output: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    file.write_all(content.as_bytes()).map_err(io)?;
    file.as_file().sync_all().map_err(io)?;
    file.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
