use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

use crate::args::Format;

/// Writes `report` to stdout in the requested format.
pub fn emit(report: &Value, format: Format) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(report)?)?,
        Format::Tsv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            for (k, v) in rows {
                writeln!(out, "{k}\t{v}")?;
            }
        }
    }
    Ok(())
}

pub fn write_json(path: &Path, report: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `key.path\tvalue` rows, array elements keyed by index.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(&key(k), v, rows);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_paths() {
        let mut rows = Vec::new();
        flatten(
            "",
            &json!({"a": {"b": [1, 2]}, "c": "x", "d": null}),
            &mut rows,
        );
        let keys: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
        assert_eq!(keys, ["a.b.0", "a.b.1", "c", "d"]);
        assert_eq!(rows[2].1, "x");
        assert_eq!(rows[3].1, "null");
    }
}
