//! JSON and CSV rendering. Floats always carry 17 significant digits.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// A flat table for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command hands back for rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub result: Value,
    /// Explicit CSV layout; otherwise the result is flattened to key,value.
    pub table: Option<Table>,
    /// A residual exceeded its tolerance.
    pub breach: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(command: &str, result: &T) -> Self {
        Self {
            command: command.to_string(),
            result: serde_json::to_value(result).expect("results serialize"),
            table: None,
            breach: false,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn breach(mut self, breach: bool) -> Self {
        self.breach = breach;
        self
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn header(command: &str) -> Value {
    serde_json::json!({
        "tool": "fibsnake",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "timestamp_unix": timestamp(),
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt17(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => to_json_string(other),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        leaf => out.push((prefix.to_string(), scalar(leaf))),
    }
}

pub fn render(outcome: &Outcome, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("schema".into(), SCHEMA.into());
            doc.insert("header".into(), header(&outcome.command));
            doc.insert("result".into(), outcome.result.clone());
            writeln!(out, "{}", to_json_string(&Value::Object(doc)))
        }
        Format::Csv => {
            writeln!(
                out,
                "# schema={SCHEMA} command={} timestamp_unix={}",
                outcome.command,
                timestamp()
            )?;
            let table = outcome.table.clone().unwrap_or_else(|| {
                let mut pairs = Vec::new();
                flatten("", &outcome.result, &mut pairs);
                Table {
                    headers: vec!["key".into(), "value".into()],
                    rows: pairs.into_iter().map(|(k, v)| vec![k, v]).collect(),
                }
            });
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
    }
}
