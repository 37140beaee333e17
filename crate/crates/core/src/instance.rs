//! Instance documents: alphabets, joint pmf and function as JSON.
//!
//! ```json
//! {
//!   "x1_alphabet": ["-2", "-1", "0"],
//!   "x2_alphabet": ["0", "1"],
//!   "joint_pmf": [["1/6", "1/6"], ["1/6", "1/6"], ["1/6", "1/6"]],
//!   "function": {"type": "builtin", "name": "sum"}
//! }
//! ```
//!
//! A table function is `{"type": "table", "table": [[...], ...]}` indexed
//! like the pmf. Symbols and masses may be JSON strings or numbers.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::probability::{parse_rational, Builtin, Rational, SourceModel};
use crate::results::rational_string;

fn field_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Instance {
        field: field.into(),
        message: message.into(),
    }
}

fn scalar_text(v: &Value, field: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(field_err(field, format!("expected a string or number, found {other}"))),
    }
}

fn array<'a>(v: Option<&'a Value>, field: &str) -> Result<&'a Vec<Value>> {
    match v {
        Some(Value::Array(a)) => Ok(a),
        Some(other) => Err(field_err(field, format!("expected an array, found {other}"))),
        None => Err(field_err(field, "missing")),
    }
}

fn symbols(doc: &Value, field: &str) -> Result<Vec<String>> {
    array(doc.get(field), field)?
        .iter()
        .enumerate()
        .map(|(i, v)| scalar_text(v, &format!("{field}[{i}]")))
        .collect()
}

fn matrix<T>(
    doc: &Value,
    field: &str,
    rows: usize,
    cols: usize,
    cell: impl Fn(&Value, &str) -> Result<T>,
) -> Result<Vec<Vec<T>>> {
    let outer = array(doc.get(field), field)?;
    if outer.len() != rows {
        return Err(field_err(field, format!("expected {rows} rows, found {}", outer.len())));
    }
    outer
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let name = format!("{field}[{r}]");
            let row = array(Some(row), &name)?;
            if row.len() != cols {
                return Err(field_err(&name, format!("expected {cols} entries, found {}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(c, v)| cell(v, &format!("{name}[{c}]")))
                .collect()
        })
        .collect()
}

/// Parse an instance document.
pub fn parse_instance(text: &str) -> Result<SourceModel> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        field_err("<document>", format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    if !doc.is_object() {
        return Err(field_err("<document>", "expected a JSON object"));
    }
    let x1 = symbols(&doc, "x1_alphabet")?;
    let x2 = symbols(&doc, "x2_alphabet")?;
    let pmf: Vec<Vec<Rational>> = matrix(&doc, "joint_pmf", x1.len(), x2.len(), |v, f| {
        let text = scalar_text(v, f)?;
        parse_rational(&text).map_err(|_| field_err(f, format!("`{text}` is not a rational")))
    })?;
    let function = doc.get("function").ok_or_else(|| field_err("function", "missing"))?;
    let kind = function
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| field_err("function.type", "expected \"builtin\" or \"table\""))?;
    let wrap = |e: Error| match e {
        Error::Instance { .. } => e,
        other => {
            let message = other.to_string();
            let field = ["x1_alphabet", "x2_alphabet"]
                .into_iter()
                .find(|f| message.contains(f))
                .unwrap_or(if message.contains("builtin") { "function.name" } else { "joint_pmf" });
            field_err(field, message)
        }
    };
    match kind {
        "builtin" => {
            let name = function
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| field_err("function.name", "missing"))?;
            let builtin: Builtin = name
                .parse()
                .map_err(|e: Error| field_err("function.name", e.to_string()))?;
            SourceModel::with_builtin(x1, x2, pmf, builtin).map_err(wrap)
        }
        "table" => {
            let table = matrix(function, "table", x1.len(), x2.len(), scalar_text)
                .map_err(|e| match e {
                    Error::Instance { field, message } => field_err(format!("function.{field}"), message),
                    other => other,
                })?;
            SourceModel::new(x1, x2, pmf, table).map_err(wrap)
        }
        other => Err(field_err("function.type", format!("unknown type `{other}`"))),
    }
}

pub fn load_instance(path: &Path) -> Result<SourceModel> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        field_err("<file>", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_instance(&text)
}

/// Instance document for a model, with the function as an explicit table.
pub fn instance_value(m: &SourceModel) -> Value {
    let pmf: Vec<Vec<String>> = m
        .joint()
        .matrix()
        .iter()
        .map(|row| row.iter().map(rational_string).collect())
        .collect();
    json!({
        "x1_alphabet": m.x1_alphabet(),
        "x2_alphabet": m.x2_alphabet(),
        "joint_pmf": pmf,
        "function": {"type": "table", "table": m.function_table()},
    })
}
