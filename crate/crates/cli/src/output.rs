//! Buffered table output with a self-describing header.
//!
//! CSV files start with a `# {json}` line carrying the fully resolved
//! configuration, tool version and command; JSON-lines output emits the
//! same header as its first object.  Rows are buffered and written in sweep
//! order.  All values print through the shortest round-trip float
//! formatting, so identical runs are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::{FormatChoice, RunConfig};

#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Float(v) => {
                if v.is_finite() {
                    format_float(*v)
                } else {
                    format!("\"{}\"", format_float(*v))
                }
            }
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
        }
    }
}

fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // keep integers readable ("10" not "1e1"), still round-trip exact
        format!("{v}")
    } else {
        let mut s = format!("{v}");
        if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
            s.push_str(".0");
        }
        s
    }
}

/// Column names plus buffered rows, flushed once at the end.
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Renders the table with its header into one string.
    pub fn render(&self, cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> String {
        let header = header_json(cfg, command, extra);
        let mut out = String::new();
        match cfg.format {
            FormatChoice::Csv => {
                writeln!(out, "# {header}").unwrap();
                writeln!(out, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", line.join(",")).unwrap();
                }
            }
            FormatChoice::Json => {
                writeln!(out, "{header}").unwrap();
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| format!("{}:{}", serde_json::to_string(c).unwrap(), v.json()))
                        .collect();
                    writeln!(out, "{{{}}}", fields.join(",")).unwrap();
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path, cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> Result<()> {
        let body = self.render(cfg, command, extra);
        std::fs::write(path, body)
            .with_context(|| format!("cannot write output {}", path.display()))?;
        Ok(())
    }
}

fn header_json(cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> String {
    let mut fields = vec![
        format!("\"tool\":\"cooplink\""),
        format!("\"version\":{}", serde_json::to_string(env!("CARGO_PKG_VERSION")).unwrap()),
        format!("\"command\":{}", serde_json::to_string(command).unwrap()),
        format!("\"seed\":{}", cfg.seed),
    ];
    for (k, v) in extra {
        fields.push(format!("{}:{}", serde_json::to_string(k).unwrap(), v));
    }
    fields.push(format!(
        "\"config\":{}",
        serde_json::to_string(cfg).expect("config serializes")
    ));
    format!("{{{}}}", fields.join(","))
}
