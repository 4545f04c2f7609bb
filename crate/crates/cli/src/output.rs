//! Output artifacts: CSV with `#` metadata lines or JSON with a `meta`
//! object, written atomically when a path is given.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Provenance recorded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(command: &str, args: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            args,
            seed,
        }
    }

    fn csv_lines(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# binmix {}\n# command: {}\n# args: {}\n# seed: {}\n",
            self.version,
            self.command,
            self.args.join(" "),
            seed
        )
    }
}

/// Drops the arguments that must not affect the artifact: the output path
/// and the worker count.
pub fn recorded_args<I: IntoIterator<Item = String>>(raw: I) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in raw {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--out" || a == "--threads" {
            skip_next = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--threads=") {
            continue;
        }
        out.push(a);
    }
    out
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Meta) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)
            .and_then(|_| {
                self.rows
                    .iter()
                    .try_for_each(|r| w.write_record(r))
            })
            .map_err(|e| CliError::Io(e.to_string()))?;
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(meta.csv_lines() + &String::from_utf8(body).expect("utf-8 cells"))
    }

    /// Rows as JSON objects; cells that parse as numbers or booleans are typed
    /// and empty cells become `null`.
    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj = self
                        .header
                        .iter()
                        .zip(r)
                        .map(|(h, c)| ((*h).to_string(), typed_cell(c)))
                        .collect::<serde_json::Map<_, _>>();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn typed_cell(c: &str) -> Value {
    if c.is_empty() {
        return Value::Null;
    }
    if let Ok(b) = c.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(i) = c.parse::<u64>() {
        return Value::from(i);
    }
    match c.parse::<f64>() {
        Ok(v) if v.is_finite() => Value::from(v),
        _ => Value::String(c.to_string()),
    }
}

/// JSON document `{ "meta": …, <body fields> }`.
pub fn json_document(meta: &Meta, body: Value) -> CliResult<String> {
    let mut doc = serde_json::Map::new();
    doc.insert(
        "meta".into(),
        serde_json::to_value(meta).map_err(|e| CliError::Io(e.to_string()))?,
    );
    match body {
        Value::Object(m) => doc.extend(m),
        other => {
            doc.insert("rows".into(), other);
        }
    }
    let mut s =
        serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `content` to `path` through a temporary file in the same
/// directory, or to stdout when no path is given.
pub fn emit(content: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(content.as_bytes())?;
            tmp.flush()?;
            tmp.persist(p).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(())
        }
    }
}
