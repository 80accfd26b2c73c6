//! Run records and their on-disk form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Format};
use crate::bounds::fmt_f64;
use crate::Result;

/// Name of the marker file present whenever a directory may hold partial
/// results.
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => (*i).into(),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Cell::Bool(b) => (*b).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Null => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Null, Into::into)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match table {}", self.name);
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV with a header row, `.` decimals and LF line endings.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    /// Array of row objects (keys sorted).
    pub fn to_json(&self) -> serde_json::Value {
        self.rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<_, _> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                serde_json::Value::Object(obj)
            })
            .collect()
    }
}

/// A named pass/fail outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Artifact {
    Json(serde_json::Value),
    Bytes(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub toolkit_version: String,
    /// Seconds; written to its own file so the other outputs stay
    /// byte-reproducible.
    pub wall_time: f64,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Grid points that raised errors; their rows are missing.
    pub failures: Vec<String>,
    #[serde(skip)]
    pub artifacts: BTreeMap<String, Artifact>,
}

impl RunRecord {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Deterministic summary: everything except wall time, worker count and
    /// bulk tables.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.reproducible_json(),
            "config_hash": self.config_hash,
            "toolkit_version": self.toolkit_version,
            "checks": self.checks,
            "warnings": self.warnings,
            "failures": self.failures,
            "tables": self.tables.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
            "all_pass": self.all_pass(),
        })
    }
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("json value serializes");
    out.push(b'\n');
    out
}

/// Writes every table in `format`, the artifacts, `record.json` and
/// `timing.json` into `dir`. The failure marker is written first and only
/// removed once everything succeeded and the record has no failures.
pub fn emit(record: &RunRecord, format: Format, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let marker = dir.join(FAILED_MARKER);
    fs::write(&marker, "incomplete: writing outputs\n")?;
    for t in &record.tables {
        match format {
            Format::Csv => fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?,
            Format::Json => fs::write(dir.join(format!("{}.json", t.name)), pretty(&t.to_json()))?,
        }
    }
    for (name, a) in &record.artifacts {
        match a {
            Artifact::Json(v) => fs::write(dir.join(name), pretty(v))?,
            Artifact::Bytes(b) => fs::write(dir.join(name), b)?,
        }
    }
    fs::write(dir.join("record.json"), pretty(&record.summary_json()))?;
    fs::write(dir.join("timing.json"), pretty(&serde_json::json!({ "wall_time_seconds": record.wall_time })))?;
    if record.failures.is_empty() {
        fs::remove_file(&marker)?;
    } else {
        fs::write(&marker, record.failures.join("\n") + "\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Kind;

    fn record(tables: Vec<Table>, failures: Vec<String>) -> RunRecord {
        let config = ExperimentConfig::defaults(Kind::Spectrum);
        RunRecord {
            config_hash: config.hash(),
            config,
            toolkit_version: "0".into(),
            wall_time: 1.5,
            tables,
            checks: vec![],
            warnings: vec![],
            failures,
            artifacts: BTreeMap::new(),
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("t", &["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
    }

    #[test]
    fn csv_and_json_values() {
        let mut t = Table::new("t", &["z", "a", "flag", "note"]);
        t.push(vec![0.1.into(), 3usize.into(), true.into(), Cell::Null]);
        t.push(vec![f64::NAN.into(), (-2i64).into(), false.into(), "x,y".into()]);
        assert_eq!(
            String::from_utf8(t.to_csv().unwrap()).unwrap(),
            "z,a,flag,note\n0.1,3,true,\nNaN,-2,false,\"x,y\"\n"
        );
        let j = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(j, r#"[{"a":3,"flag":true,"note":null,"z":0.1},{"a":-2,"flag":false,"note":"x,y","z":null}]"#);
    }

    #[test]
    fn json_round_trips_floats_exactly() {
        let xs = [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, 6.02214076e23, -0.0];
        let mut t = Table::new("t", &["x"]);
        for x in xs {
            t.push(vec![x.into()]);
        }
        let back: serde_json::Value = serde_json::from_slice(&pretty(&t.to_json())).unwrap();
        for (x, row) in xs.iter().zip(back.as_array().unwrap()) {
            assert_eq!(row["x"].as_f64().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn emit_is_deterministic_and_marks_failures() {
        let mut t = Table::new("rows", &["k"]);
        t.push(vec![1usize.into()]);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let rec = record(vec![t.clone()], vec![]);
        emit(&rec, Format::Csv, &a).unwrap();
        let mut other = rec.clone();
        other.wall_time = 99.0;
        emit(&other, Format::Csv, &b).unwrap();
        for f in ["rows.csv", "record.json"] {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
        }
        assert!(!a.join(FAILED_MARKER).exists());
        let bad = record(vec![t], vec!["point 3: boom".into()]);
        emit(&bad, Format::Json, &a).unwrap();
        assert!(a.join("rows.json").exists());
        assert_eq!(fs::read_to_string(a.join(FAILED_MARKER)).unwrap(), "point 3: boom\n");
    }
}
