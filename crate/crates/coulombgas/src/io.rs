//! Artifact formats: CSV with a `#` header block, JSON mirrors, density and
//! spectrum readers.

use std::io::{self, Write};
use std::path::Path;

use coulombgas_core::denoise::MiReport;
use coulombgas_core::freeprob::Density;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Provenance block written ahead of every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Free-form `key: value` notes, e.g. per-λ normalization checks.
    pub notes: Vec<(String, String)>,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

fn header_lines(h: &Header) -> Vec<String> {
    let seeds: Vec<String> = h.seeds.iter().map(u64::to_string).collect();
    let mut v = vec![
        format!("# coulombgas {}", h.version),
        format!("# command: {}", h.command),
        format!("# config-hash: {}", h.config_hash),
        format!("# seeds: {}", seeds.join(",")),
    ];
    v.extend(h.notes.iter().map(|(k, val)| format!("# {k}: {val}")));
    v
}

pub fn write_csv<W: Write>(mut w: W, h: &Header, t: &Table) -> io::Result<()> {
    for line in header_lines(h) {
        writeln!(w, "{line}")?;
    }
    let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    cw.write_record(&t.columns)?;
    for r in &t.rows {
        cw.write_record(r.iter().map(Cell::csv))?;
    }
    cw.flush()
}

pub fn table_json(h: &Header, t: &Table) -> Value {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (c, v) in t.columns.iter().zip(r) {
                m.insert((*c).to_string(), v.json());
            }
            Value::Object(m)
        })
        .collect();
    json!({ "header": h, "columns": t.columns, "rows": rows })
}

pub fn write_json<W: Write>(mut w: W, h: &Header, t: &Table) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, &table_json(h, t))?;
    writeln!(w)
}

/// Columns of the MI artifact.
pub const MI_COLUMNS: [&str; 11] =
    ["lambda", "beta", "n", "seed", "mi", "mmse", "method", "stderr", "config_hash", "status", "message"];

pub fn mi_row(r: &MiReport, config_hash: &str) -> Vec<Cell> {
    vec![
        r.lambda.into(),
        (r.beta.value() as usize).into(),
        r.n.into(),
        r.seed.map_or(Cell::Empty, Cell::from),
        r.mi.into(),
        r.mmse.into(),
        r.method.as_str().into(),
        r.stderr.into(),
        config_hash.into(),
        "ok".into(),
        Cell::Empty,
    ]
}

fn read_numeric_csv(path: &Path, want: &[&str]) -> io::Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(io::Error::other)?;
    let hdr = rd.headers().map_err(io::Error::other)?.clone();
    let idx: Vec<usize> = want
        .iter()
        .map(|c| {
            hdr.iter()
                .position(|h| h == *c)
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("missing column '{c}'")))
        })
        .collect::<io::Result<_>>()?;
    let mut out = vec![Vec::new(); want.len()];
    for rec in rd.records() {
        let rec = rec.map_err(io::Error::other)?;
        for (k, &i) in idx.iter().enumerate() {
            let v: f64 = rec
                .get(i)
                .unwrap_or("")
                .parse()
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("non-numeric '{}' entry", want[k])))?;
            out[k].push(v);
        }
    }
    Ok(out)
}

/// Tabulated density from a CSV with `x` and `rho` columns (comments allowed).
pub fn read_density_csv(path: &Path) -> io::Result<Density> {
    let mut cols = read_numeric_csv(path, &["x", "rho"])?;
    let rho = cols.pop().unwrap_or_default();
    let x = cols.pop().unwrap_or_default();
    Density::sampled(x, rho).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}

/// The `eigenvalue` column of a spectrum CSV, optionally restricted to one
/// seed.
pub fn read_spectrum_csv(path: &Path, seed: Option<u64>) -> io::Result<Vec<f64>> {
    let cols = read_numeric_csv(path, &["seed", "eigenvalue"])?;
    Ok(cols[0]
        .iter()
        .zip(&cols[1])
        .filter(|(s, _)| seed.is_none_or(|want| **s as u64 == want))
        .map(|(_, v)| *v)
        .collect())
}
