//! The JSON results document and serde helpers for exact rationals.
//!
//! Rationals are written as strings (`"5/2"`, `"3"`) so documents round-trip
//! without loss.

use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::probability::Rational;

pub const SCHEMA: &str = "fcolor/1";

pub fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

pub fn ser_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&rational_string(r)),
        None => s.serialize_none(),
    }
}

pub fn ser_rationals<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(rational_string))
}

/// A results document: `{"schema": "fcolor/1", "command": ..., ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    fields: Map<String, Value>,
}

impl Document {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("schema".into(), json!(SCHEMA));
        fields.insert("command".into(), json!(command));
        Self { fields }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("results values serialize");
        self.fields.insert(key.to_string(), v);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn value(&self) -> Value {
        Value::Object(self.fields.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.value()).expect("json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::parse_rational;

    #[test]
    fn rationals_render_exactly() {
        assert_eq!(rational_string(&parse_rational("10/4").unwrap()), "5/2");
        assert_eq!(rational_string(&parse_rational("-3").unwrap()), "-3");
    }

    #[test]
    fn document_keeps_schema_first() {
        let mut d = Document::new("build");
        d.set("vertices", 5);
        let text = d.to_json();
        assert!(text.find("schema").unwrap() < text.find("vertices").unwrap());
        assert_eq!(d.get("schema").unwrap(), "fcolor/1");
    }
}
