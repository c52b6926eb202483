//! Tabular reports rendered as CSV or column-oriented JSON.
//!
//! Numbers are rounded to 12 significant digits once, and both encoders
//! print that same rounded `f64`, so the two formats parse to identical
//! values. Missing numbers are empty CSV fields and JSON `null`.

use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(Option<f64>),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite()).map(round_sig)
}

/// Plain decimal in the usual range, exponent form for very small or large
/// magnitudes.
fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Num(v) => finite(*v).map(format_number).unwrap_or_default(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Num(v) => finite(*v)
            .and_then(Number::from_f64)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Cell::Bool(b) => Value::Bool(*b),
    }
}

pub fn to_csv(table: &Table) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_field)).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(format!("csv: {e}")))
}

pub fn to_json(table: &Table) -> CliResult<Vec<u8>> {
    let mut obj = Map::new();
    for (i, name) in table.columns.iter().enumerate() {
        let column = table.rows.iter().map(|r| json_value(&r[i])).collect();
        obj.insert((*name).to_string(), Value::Array(column));
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(obj))
        .map_err(|e| CliError::Io(format!("json: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn render(table: &Table, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}
