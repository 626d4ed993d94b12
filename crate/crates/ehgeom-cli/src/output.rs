//! Tabular and report output in CSV or JSON with fixed formatting.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Number with 17 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows under fixed column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Empty table with the given columns.
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; its length must match the columns.
    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Result of a command.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Report(Value),
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_i64().map_or_else(|| fmt_num(n.as_f64().unwrap_or(f64::NAN)), |i| i.to_string()),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_csv(output: &Output) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    match output {
        Output::Table(t) => {
            w.write_record(&t.columns).map_err(err)?;
            for row in &t.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(err)?;
            }
        }
        Output::Report(v) => {
            let mut pairs = Vec::new();
            flatten("", v, &mut pairs);
            w.write_record(["key", "value"]).map_err(err)?;
            for (k, x) in pairs {
                w.write_record([k, scalar_text(&x)]).map_err(err)?;
            }
        }
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn render_json(output: &Output) -> CliResult<Vec<u8>> {
    let value = match output {
        Output::Table(t) => Value::Array(
            t.rows
                .iter()
                .map(|row| {
                    let map: Map<String, Value> = t.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(map)
                })
                .collect(),
        ),
        Output::Report(v) => v.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Encodes `output` and writes it to `path`, or to standard output.
pub fn write_output(output: &Output, format: Format, path: Option<&Path>) -> CliResult<()> {
    let bytes = match format {
        Format::Csv => render_csv(output)?,
        Format::Json => render_json(output)?,
    };
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => std::io::stdout().lock().write_all(&bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(fmt_num(-0.357_770_876_399_966_35), "-3.5777087639996635e-1");
        assert_eq!(fmt_num(16.0), "1.6000000000000000e1");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn report_flattens_to_key_value_rows() {
        let v = serde_json::json!({"a": {"b": 1.5, "c": [2, "x"]}, "d": true});
        let bytes = render_csv(&Output::Report(v)).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "key,value\na.b,1.5000000000000000e0\na.c.0,2\na.c.1,x\nd,true\n");
    }

    #[test]
    fn table_json_keeps_column_order() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![Cell::Num(1.0), Cell::Empty]);
        let text = String::from_utf8(render_json(&Output::Table(t)).unwrap()).unwrap();
        assert!(text.find("\"z\"").unwrap() < text.find("\"a\"").unwrap());
        assert!(text.contains("null"));
    }
}
