use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use recert::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// One CSV row per object, columns from the first object's keys.
pub fn rows_to_csv(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",") + "\n";
    for row in rows {
        let line: Vec<String> = keys.iter().map(|k| cell(row.get(k.as_str()).unwrap_or(&Value::Null))).collect();
        out += &(line.join(",") + "\n");
    }
    out
}

fn render(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(value)
            .map(|s| s + "\n")
            .map_err(|e| Error::Io(e.to_string())),
        Format::Csv => Ok(match value {
            Value::Array(rows) => rows_to_csv(rows),
            Value::Object(_) => rows_to_csv(std::slice::from_ref(value)),
            other => cell(other) + "\n",
        }),
    }
}

/// Prints to stdout, or writes `<name>.<ext>` into `out`.
pub fn emit(value: &Value, format: Format, out: Option<&Path>, name: &str) -> Result<()> {
    let text = render(value, format)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            let path = dir.join(format!("{name}.{ext}"));
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
