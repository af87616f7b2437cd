//! Deterministic rendering: JSON floats at 12 significant digits, CSV floats at 15.

use serde_json::{Map, Number, Value};

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Rounds every float inside a JSON value to 12 significant digits. Non-finite numbers become null.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), 12);
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn json_string(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// CSV cell with 15 significant digits.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        String::new()
    }
}

/// Writes to the path if given, otherwise stdout.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
