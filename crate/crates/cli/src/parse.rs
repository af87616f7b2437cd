//! Parsers for the compact argument forms (`pendulum:M=81`, `Ta=0.1,Tb=2`, `0:4.712`, ...).

use crate::CliError;
use std::collections::BTreeMap;
use varstab::potential::{Potential, PotentialDescriptor};

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("{what}: `{s}` is not a number")))
}

/// `key=value` pairs separated by commas.
pub fn key_values(s: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{part}`")))?;
        out.insert(k.trim().to_string(), number(v, k)?);
    }
    Ok(out)
}

/// `lo:hi` with lo < hi.
pub fn interval(s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s.split_once(':').ok_or_else(|| CliError::Usage(format!("expected lo:hi, got `{s}`")))?;
    let (a, b) = (number(a, "interval start")?, number(b, "interval end")?);
    if !(a < b) {
        return Err(CliError::Usage(format!("interval {s} must have lo < hi")));
    }
    Ok((a, b))
}

/// `family:k=v,...`, `quadwell[:a=..,b=..]`, `json:{descriptor}` or `@descriptor.json`.
pub fn potential(s: &str) -> Result<Potential, CliError> {
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
        return Ok(Potential::from_descriptor(&PotentialDescriptor::from_json(&text)?)?);
    }
    if let Some(json) = s.strip_prefix("json:") {
        return Ok(Potential::from_descriptor(&PotentialDescriptor::from_json(json)?)?);
    }
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params = key_values(rest)?;
    let name = match name {
        "quadwell" => {
            params.entry("a".into()).or_insert(1.0);
            params.entry("b".into()).or_insert(1.0);
            "double_well"
        }
        other => other,
    };
    Ok(Potential::from_descriptor(&PotentialDescriptor { family: name.to_string(), params, table: None })?)
}

/// `A=value` for free ends.
pub fn neumann(s: &str) -> Result<f64, CliError> {
    let kv = key_values(s)?;
    match (kv.get("A"), kv.len()) {
        (Some(a), 1) => Ok(*a),
        _ => Err(CliError::Usage(format!("--neumann expects A=<value>, got `{s}`"))),
    }
}

/// `Ta=..,Tb=..` for fixed ends.
pub fn dirichlet(s: &str) -> Result<(f64, f64), CliError> {
    let kv = key_values(s)?;
    match (kv.get("Ta"), kv.get("Tb"), kv.len()) {
        (Some(a), Some(b), 2) => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("--dirichlet expects Ta=<value>,Tb=<value>, got `{s}`"))),
    }
}

/// Coefficient source for the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum FSource {
    Constant(f64),
    Table(String),
}

/// `const:<c>` or `table:<path>` (two CSV columns s,f; a header line is skipped).
pub fn f_source(s: &str) -> Result<FSource, CliError> {
    if let Some(c) = s.strip_prefix("const:") {
        return Ok(FSource::Constant(number(c, "constant coefficient")?));
    }
    if let Some(p) = s.strip_prefix("table:") {
        return Ok(FSource::Table(p.to_string()));
    }
    Err(CliError::Usage(format!("--f expects const:<value> or table:<path>, got `{s}`")))
}

/// Reads a two-column CSV.
pub fn read_table(path: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            return Err(CliError::Usage(format!("{path}:{}: expected two columns", n + 1)));
        }
        match (cols[0].trim().parse::<f64>(), cols[1].trim().parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if xs.is_empty() => continue, // header
            _ => return Err(CliError::Usage(format!("{path}:{}: not numeric", n + 1))),
        }
    }
    Ok((xs, ys))
}
