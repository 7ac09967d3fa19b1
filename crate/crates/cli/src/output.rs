//! Tables and their CSV/JSON renderings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use displearn::export::{fmt_f64, write_header, SCHEMA_VERSION};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(x) => json!(fmt_f64(*x)),
            Cell::U(x) => json!(x),
            Cell::S(s) => json!(s),
            Cell::B(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::U(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Artifact kind written into the schema line, e.g. `tail`.
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(kind: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Self { kind: kind.into(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write, C: Serialize>(&self, mut w: W, config: &C) -> anyhow::Result<()> {
        write_header(&mut w, &self.kind, config)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.clone(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        json!({ "kind": self.kind, "columns": self.columns, "rows": rows })
    }
}

/// Named tables produced by one command.
pub struct Artifact {
    pub command: String,
    pub tables: Vec<(String, Table)>,
}

impl Artifact {
    pub fn single(command: &str, table: Table) -> Self {
        Self { command: command.into(), tables: vec![(command.into(), table)] }
    }

    /// Writes the artifact. CSV with several tables and an output path
    /// goes to `<stem>_<name>.csv`; without a path everything goes to
    /// stdout. JSON is always a single document.
    pub fn write<C: Serialize>(&self, out: Option<&Path>, format: Format, config: &C) -> anyhow::Result<Vec<PathBuf>> {
        match (format, out) {
            (Format::Json, path) => {
                let mut tables = Map::new();
                for (name, t) in &self.tables {
                    tables.insert(name.clone(), t.to_json());
                }
                let doc = json!({
                    "schema": format!("displearn {} schema {SCHEMA_VERSION}", self.command),
                    "config": serde_json::to_value(config)?,
                    "tables": tables,
                });
                let text = serde_json::to_string_pretty(&doc)? + "\n";
                match path {
                    Some(p) => {
                        std::fs::write(p, text)?;
                        Ok(vec![p.to_path_buf()])
                    }
                    None => {
                        std::io::stdout().lock().write_all(text.as_bytes())?;
                        Ok(Vec::new())
                    }
                }
            }
            (Format::Csv, None) => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                for (_, t) in &self.tables {
                    t.write_csv(&mut lock, config)?;
                }
                Ok(Vec::new())
            }
            (Format::Csv, Some(p)) if self.tables.len() == 1 => {
                self.tables[0].1.write_csv(BufWriter::new(File::create(p)?), config)?;
                Ok(vec![p.to_path_buf()])
            }
            (Format::Csv, Some(p)) => {
                let stem = p.with_extension("");
                let mut written = Vec::new();
                for (name, t) in &self.tables {
                    let path = PathBuf::from(format!("{}_{name}.csv", stem.display()));
                    t.write_csv(BufWriter::new(File::create(&path)?), config)?;
                    written.push(path);
                }
                Ok(written)
            }
        }
    }
}
