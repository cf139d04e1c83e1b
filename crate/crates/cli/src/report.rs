//! Report envelope and its JSON and CSV encodings.

use std::time::Duration;

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, inputs: Value, results: Value) -> Self {
        Report {
            command: command.to_string(),
            inputs,
            results,
        }
    }

    fn envelope(&self, timing: Option<Duration>) -> Value {
        let mut top = Map::new();
        top.insert("schema_version".into(), json!(SCHEMA_VERSION));
        top.insert("command".into(), json!(self.command));
        top.insert("inputs".into(), self.inputs.clone());
        top.insert("results".into(), self.results.clone());
        if let Some(t) = timing {
            top.insert("timing".into(), json!({ "elapsed_ms": t.as_millis() as u64 }));
        }
        Value::Object(top)
    }

    pub fn to_json(&self, timing: Option<Duration>) -> String {
        serde_json::to_string_pretty(&self.envelope(timing)).expect("serializable") + "\n"
    }

    pub fn to_csv(&self, timing: Option<Duration>) -> String {
        let mut rows = Vec::new();
        flatten("", &self.envelope(timing), &mut rows);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"]).expect("in-memory write");
        for (k, v) in rows {
            w.write_record([k, v]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }
}

/// Dotted key paths to scalar leaves; strings are emitted verbatim, so
/// rationals appear exactly as in the JSON encoding.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
