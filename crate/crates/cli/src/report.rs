//! Report model and its CSV / JSON renderings.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    /// CSV rendering: floats with 17 significant digits.
    pub fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Text(t) => s.serialize_str(t),
            Cell::Num(x) => s.serialize_f64(*x),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Serialize)]
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
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Holds,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
    pub witness: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
            passed: value <= bound,
            witness: None,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Above,
            bound,
            passed: value > bound,
            witness: None,
        }
    }

    /// Boolean check; `value` is 1 when it holds.
    pub fn holds(name: impl Into<String>, holds: bool) -> Self {
        Self {
            name: name.into(),
            value: if holds { 1.0 } else { 0.0 },
            relation: Relation::Holds,
            bound: 1.0,
            passed: holds,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Option<String>) -> Self {
        self.witness = witness;
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        match self.relation {
            Relation::Holds => write!(f, "[{tag}] {}", self.name)?,
            Relation::AtMost => write!(
                f,
                "[{tag}] {} = {:.6e} (<= {:e})",
                self.name, self.value, self.bound
            )?,
            Relation::Above => write!(
                f,
                "[{tag}] {} = {:.6e} (> {:e})",
                self.name, self.value, self.bound
            )?,
        }
        if !self.passed {
            if let Some(w) = &self.witness {
                write!(f, "; worst: {w}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub kind: String,
    pub description: Option<String>,
    pub summary: BTreeMap<String, Cell>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(scenario: &str, kind: &str, description: Option<&str>) -> Self {
        Self {
            scenario: scenario.to_string(),
            kind: kind.to_string(),
            description: description.map(str::to_string),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new(
            "checks",
            &["check", "value", "relation", "bound", "passed", "witness"],
        );
        for c in &self.checks {
            let relation = match c.relation {
                Relation::AtMost => "<=",
                Relation::Above => ">",
                Relation::Holds => "==",
            };
            t.push(vec![
                c.name.as_str().into(),
                c.value.into(),
                relation.into(),
                c.bound.into(),
                c.passed.into(),
                c.witness.clone().into(),
            ]);
        }
        t
    }

    fn summary_table(&self) -> Table {
        let mut t = Table::new("summary", &["key", "value"]);
        for (k, v) in &self.summary {
            t.push(vec![k.as_str().into(), v.clone()]);
        }
        t
    }

    /// All tables, each preceded by a `# name` line.
    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        for t in std::iter::once(self.summary_table())
            .chain(std::iter::once(self.checks_table()))
            .chain(self.tables.iter().cloned())
        {
            writeln!(buf, "# {}", t.name).expect("in-memory write");
            t.write_csv(&mut buf).expect("in-memory write");
        }
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// `report.json`, or one `<table>.csv` per table plus `summary.csv` and
    /// `checks.csv`.
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<Vec<String>, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Write { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let path = dir.join("report.json");
                fs::write(&path, self.to_json()).map_err(io(&path))?;
                written.push("report.json".to_string());
            }
            Format::Csv => {
                for t in [self.summary_table(), self.checks_table()]
                    .iter()
                    .chain(&self.tables)
                {
                    let name = format!("{}.csv", t.name);
                    let path = dir.join(&name);
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf).expect("in-memory write");
                    fs::write(&path, buf).map_err(io(&path))?;
                    written.push(name);
                }
            }
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}
