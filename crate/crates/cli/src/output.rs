//! Rendering of command results as JSON, CSV or aligned text. Every float
//! is rounded to 15 significant digits first, so all three formats agree.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::error::CliError;

pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}

/// Same spelling as the JSON output: shortest round-trip of the rounded
/// value, switching to exponent notation for very small or large numbers.
pub fn fmt15(x: f64) -> String {
    Number::from_f64(round15(x)).map(|n| n.to_string()).unwrap_or_else(|| x.to_string())
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| Number::from_f64(round15(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// A command result: a JSON document plus its tabular CSV form.
pub struct Rendered {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Rendered {
    pub fn new(report: &impl Serialize) -> Result<Self, CliError> {
        let mut json = serde_json::to_value(report)?;
        round_value(&mut json);
        Ok(Self { json, header: Vec::new(), rows: Vec::new() })
    }

    /// CSV columns taken from the top-level scalar fields of the JSON.
    pub fn scalar_row(mut self) -> Self {
        if let Value::Object(map) = &self.json {
            let (h, r): (Vec<_>, Vec<_>) = map
                .iter()
                .filter(|(_, v)| !v.is_array() && !v.is_object())
                .map(|(k, v)| (k.clone(), scalar(v)))
                .unzip();
            self.header = h;
            self.rows = vec![r];
        }
        self
    }

    pub fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&self.json)? + "\n",
            Format::Csv => {
                let mut s = self.header.join(",") + "\n";
                for r in &self.rows {
                    s += &r.join(",");
                    s.push('\n');
                }
                s
            }
            Format::Text => text(&self.json),
        })
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// `key: value` lines for scalars; arrays of objects become aligned
/// tables under their key.
fn text(v: &Value) -> String {
    let mut out = String::new();
    let Value::Object(map) = v else {
        return scalar(v) + "\n";
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    for (k, v) in map {
        match v {
            Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                out += &format!("{k}:\n");
                out += &aligned(items);
            }
            Value::Object(inner) => {
                out += &format!("{k}:\n");
                for line in text(&Value::Object(inner.clone())).lines() {
                    out += &format!("  {line}\n");
                }
            }
            _ => out += &format!("{k:width$}  {}\n", scalar(v)),
        }
    }
    out
}

fn aligned(items: &[Value]) -> String {
    let empty = Map::new();
    let first = items[0].as_object().unwrap_or(&empty);
    let keys: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = items
        .iter()
        .map(|it| keys.iter().map(|k| it.get(k.as_str()).map(scalar).unwrap_or_default()).collect())
        .collect();
    let widths: Vec<usize> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| cells.iter().map(|r| r[i].chars().count()).max().unwrap_or(0).max(k.chars().count()))
        .collect();
    let line = |r: Vec<String>| {
        let parts: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("  {}\n", parts.join("  ").trim_end())
    };
    let mut out = line(keys.iter().map(|k| k.to_string()).collect());
    for r in cells {
        out += &line(r);
    }
    out
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
