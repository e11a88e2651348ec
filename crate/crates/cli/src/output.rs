use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

pub fn render<T: Serialize>(value: &T, format: Format) -> String {
    let v = serde_json::to_value(value).expect("reports serialize");
    match format {
        Format::Json => v.to_string(),
        Format::Pretty => serde_json::to_string_pretty(&v).expect("reports serialize"),
        Format::Csv => to_csv(&v),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// A top-level `rows` array of objects becomes a table; anything else is
/// flattened into a single header line and a single value line.
fn to_csv(v: &Value) -> String {
    let table = v
        .get("rows")
        .and_then(Value::as_array)
        .filter(|rows| rows.iter().all(Value::is_object));
    let rows: Vec<Vec<(String, String)>> = match table {
        Some(rows) => rows
            .iter()
            .map(|r| {
                let mut cells = Vec::new();
                flatten("", r, &mut cells);
                cells
            })
            .collect(),
        None => {
            let mut cells = Vec::new();
            flatten("", v, &mut cells);
            vec![cells]
        }
    };
    let mut text = String::new();
    if let Some(first) = rows.first() {
        let header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
        text.push_str(&header.join(","));
        for row in &rows {
            text.push('\n');
            let values: Vec<&str> = row.iter().map(|(_, x)| x.as_str()).collect();
            text.push_str(&values.join(","));
        }
    }
    text
}
