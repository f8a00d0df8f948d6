//! Suite reports and their CSV/JSON emission.

use crate::config::RunConfig;
use crate::error::RunError;
use crate::schema;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const TOOL: &str = "bergman";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A cell printed in shortest round-trip form.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(format_f64(*v)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::report::Cell::from($v)),*] };
}

#[derive(Clone, Debug)]
pub struct Table {
    /// File stem; the header comes from [`schema::header`].
    pub name: &'static str,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str) -> Self {
        assert!(schema::header(name).is_some(), "table {name} missing from the schema");
        Table { name, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        let width = schema::header(self.name).map(|h| h.len()).unwrap_or(0);
        assert_eq!(row.len(), width, "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn header(&self) -> &'static [&'static str] {
        schema::header(self.name).expect("schema entry")
    }

    fn to_json(&self) -> Value {
        let header = self.header();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> = header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| (h.to_string(), c.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "columns": header, "rows": rows })
    }
}

pub fn measured_json(m: &BTreeMap<String, f64>) -> Value {
    Value::Object(
        m.iter()
            .map(|(k, v)| (k.clone(), Cell::Float(*v).to_json()))
            .collect(),
    )
}

/// A pass/fail flag. Only gating flags decide the exit status.
#[derive(Clone, Debug, Serialize)]
pub struct Flag {
    pub name: String,
    pub pass: bool,
    pub gating: bool,
    pub detail: String,
}

impl Flag {
    pub fn gate(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Flag {
            name: name.into(),
            pass,
            gating: true,
            detail: detail.into(),
        }
    }

    pub fn info(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Flag {
            name: name.into(),
            pass,
            gating: false,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: &'static str,
    pub tables: Vec<Table>,
    pub flags: Vec<Flag>,
    /// Structured results from the lab, embedded verbatim in the JSON.
    pub data: Value,
    /// Scalar summaries keyed by dotted names, for manifests and tests.
    pub measured: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(suite: &'static str) -> Self {
        Report {
            suite,
            tables: Vec::new(),
            flags: Vec::new(),
            data: Value::Object(Default::default()),
            measured: BTreeMap::new(),
        }
    }

    /// Removes and returns the table `name`, or a fresh one.
    pub fn take_table(&mut self, name: &'static str) -> Table {
        match self.tables.iter().position(|t| t.name == name) {
            Some(i) => self.tables.remove(i),
            None => Table::new(name),
        }
    }

    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub fn passed(&self) -> bool {
        self.flags.iter().filter(|f| f.gating).all(|f| f.pass)
    }

    pub fn attach(&mut self, key: &str, value: impl Serialize) -> Result<(), RunError> {
        let v = serde_json::to_value(value)?;
        if let Value::Object(map) = &mut self.data {
            map.insert(key.to_string(), v);
        }
        Ok(())
    }

    /// Appends `values` to the JSON array under `key`.
    pub fn append<T: Serialize>(&mut self, key: &str, values: Vec<T>) -> Result<(), RunError> {
        let mut new: Vec<Value> = values.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
        if let Value::Object(map) = &mut self.data {
            match map.get_mut(key) {
                Some(Value::Array(a)) => a.append(&mut new),
                _ => {
                    map.insert(key.to_string(), Value::Array(new));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, cfg: &RunConfig) -> Result<Value, RunError> {
        let tables: serde_json::Map<String, Value> =
            self.tables.iter().map(|t| (t.name.to_string(), t.to_json())).collect();
        Ok(json!({
            "tool": TOOL,
            "version": VERSION,
            "suite": self.suite,
            "config": serde_json::to_value(cfg)?,
            "quadrature": serde_json::to_value(&cfg.quadrature)?,
            "passed": self.passed(),
            "flags": self.flags,
            "measured": measured_json(&self.measured),
            "tables": tables,
            "data": self.data,
        }))
    }

    /// Writes `<table>.csv` for each table and `<suite>.json`; returns the paths.
    pub fn write(&self, cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
        let mut written = Vec::new();
        if cfg.format.csv() {
            for t in &self.tables {
                let path = cfg.output_dir.join(format!("{}.csv", t.name));
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(t.header())?;
                for r in &t.rows {
                    w.write_record(r.iter().map(Cell::render))?;
                }
                w.flush()?;
                written.push(path);
            }
        }
        if cfg.format.json() {
            let path = cfg.output_dir.join(format!("{}.json", self.suite));
            let mut text = serde_json::to_string_pretty(&self.to_json(cfg)?)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Human-readable summary for stdout.
    pub fn summary(&self) -> String {
        let mut s = format!("== {} ==\n", self.suite);
        let width = self.flags.iter().map(|f| f.name.len()).max().unwrap_or(0);
        for f in &self.flags {
            let status = if f.pass { "PASS" } else { "FAIL" };
            let kind = if f.gating { "" } else { " (info)" };
            s.push_str(&format!("  {status}  {:width$}  {}{kind}\n", f.name, f.detail));
        }
        s.push_str(&format!(
            "  suite {}\n",
            if self.passed() { "passed" } else { "FAILED" }
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn only_gating_flags_decide() {
        let mut r = Report::new("models");
        r.flags.push(Flag::info("x", false, ""));
        assert!(r.passed());
        r.flags.push(Flag::gate("y", false, ""));
        assert!(!r.passed());
    }
}
