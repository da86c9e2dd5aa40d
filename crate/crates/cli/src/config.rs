//! Flat key-value config files (TOML). Each key names a long flag of the
//! selected subcommand; flags given on the command line win.

use std::ffi::OsString;
use std::fs;

use toml::{Table, Value};

pub const ENUMERATION_CAP_VAR: &str = "FIBSNAKE_ENUMERATION_CAP";

fn value_string(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(f.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

/// Translate a config table into command-line arguments, skipping keys the
/// user already passed.
pub fn config_args(table: &Table, user: &[String]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{key}");
        let given = user
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if given || key == "config" {
            continue;
        }
        match value {
            Value::Boolean(true) => out.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone());
                    out.push(value_string(item)?);
                }
            }
            v => {
                out.push(flag);
                out.push(value_string(v)?);
            }
        }
    }
    Ok(out)
}

/// Find `--config PATH` in the raw arguments and append the file's flags.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strings: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            path = strings.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let table: Table = text
        .parse()
        .map_err(|e| format!("invalid config {path}: {e}"))?;
    let extra = config_args(&table, &strings)?;
    let mut out = args;
    out.extend(extra.into_iter().map(OsString::from));
    Ok(out)
}

/// Enumeration cap, from the environment when set.
pub fn enumeration_cap() -> Result<usize, String> {
    match std::env::var(ENUMERATION_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{ENUMERATION_CAP_VAR} must be a positive integer, got '{v}'")),
        Err(_) => Ok(fibsnake::lattice::DEFAULT_ENUMERATION_CAP),
    }
}
