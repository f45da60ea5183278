//! Tabular results rendered as CSV or JSON, with the config echoed first.

use serde_json::{json, Map, Value};

use extremal_core::scalar::{self, ExactScalar};

use crate::config::{ExperimentConfig, Format};

#[derive(Clone, Debug)]
pub enum Cell {
    Exact(ExactScalar),
    Float(f64),
    Int(i128),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Exact(x) => scalar::fmt_exact(x),
            Cell::Float(x) => x.to_string(),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Exact(x) => Value::String(scalar::fmt_exact(x)),
            Cell::Float(x) => json!(x),
            Cell::Int(x) => i64::try_from(*x).map_or_else(|_| Value::String(x.to_string()), |v| json!(v)),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<ExactScalar> for Cell {
    fn from(x: ExactScalar) -> Self {
        Cell::Exact(x)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
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

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column names and per-row cells, with `<name>_decimal` after each
    /// exact column when requested.
    fn expanded(&self, decimal: bool) -> (Vec<String>, Vec<Vec<Cell>>) {
        let exact_cols: Vec<bool> = (0..self.columns.len())
            .map(|c| decimal && self.rows.iter().any(|r| matches!(r[c], Cell::Exact(_))))
            .collect();
        let mut cols = Vec::new();
        for (c, name) in self.columns.iter().enumerate() {
            cols.push(name.clone());
            if exact_cols[c] {
                cols.push(format!("{name}_decimal"));
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = Vec::new();
                for (c, cell) in r.iter().enumerate() {
                    out.push(cell.clone());
                    if exact_cols[c] {
                        out.push(match cell {
                            Cell::Exact(x) => Cell::Float(scalar::to_f64(x)),
                            _ => Cell::Text(String::new()),
                        });
                    }
                }
                out
            })
            .collect();
        (cols, rows)
    }
}

/// What a command produces: a summary record, a table and whether a
/// criterion violation was found.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub summary: Value,
    pub table: Table,
    pub violated: bool,
}

pub fn render(config: &ExperimentConfig, artifact: &Artifact) -> String {
    let config_json = serde_json::to_value(config).expect("config serializes");
    let (cols, rows) = artifact.table.expanded(config.output.decimal);
    match config.output.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = cols.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                    Value::Object(m)
                })
                .collect();
            let doc = json!({
                "config": config_json,
                "summary": artifact.summary,
                "violated": artifact.violated,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = format!(
                "# config: {}\n# summary: {}\n# violated: {}\n",
                config_json, artifact.summary, artifact.violated
            );
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&cols).expect("in-memory write");
            for r in &rows {
                w.write_record(r.iter().map(Cell::text)).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
            out
        }
    }
}
