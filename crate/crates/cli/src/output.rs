use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

/// A CSV cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => format_f64(*x),
            Cell::U(n) => n.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::U(n) => Value::from(*n),
            Cell::B(b) => Value::from(*b),
            Cell::S(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::U(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_owned())
    }
}

/// `d.dddddddddddddddde±x`, or `inf`/`-inf`/`nan`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Rows under a fixed header, plus provenance lines written as `#` comments.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.provenance {
            out.push_str(&format!("# {p}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut obj = Map::new();
        if !self.provenance.is_empty() {
            obj.insert("provenance".into(), Value::from(self.provenance.clone()));
        }
        obj.insert("rows".into(), Value::Array(rows));
        Value::Object(obj)
    }
}

/// What a command produces: a table or a single JSON report.
pub enum Report {
    Table(Table),
    Json(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Report::Table(t), Format::Csv) => t.to_csv(),
            (Report::Table(t), Format::Json) => pretty(&t.to_json()),
            (Report::Json(v), Format::Json) => pretty(v),
            (Report::Json(v), Format::Csv) => json_to_csv(v),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// A flat one-row CSV of a JSON object; nested values are flattened with
/// `.`-joined keys.
fn json_to_csv(v: &Value) -> String {
    fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    flatten(&key, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    flatten(&format!("{prefix}.{i}"), x, out);
                }
            }
            Value::Number(n) => {
                let cell = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                    (Some(u), _, _) => u.to_string(),
                    (_, Some(i), _) => i.to_string(),
                    (_, _, Some(f)) => format_f64(f),
                    _ => n.to_string(),
                };
                out.push((prefix.to_owned(), cell));
            }
            Value::Bool(b) => out.push((prefix.to_owned(), b.to_string())),
            Value::String(s) => out.push((prefix.to_owned(), Cell::S(s.clone()).csv())),
            Value::Null => out.push((prefix.to_owned(), String::new())),
        }
    }
    let mut cells = Vec::new();
    flatten("", v, &mut cells);
    let (h, r): (Vec<String>, Vec<String>) = cells.into_iter().unzip();
    format!("{}\n{}\n", h.join(","), r.join(","))
}

pub fn write_output(text: &str, dest: Option<&Path>) -> io::Result<()> {
    match dest {
        Some(path) => File::create(path)?.write_all(text.as_bytes()),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
