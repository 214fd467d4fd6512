//! JSON output with every number rounded to 15 significant digits.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use chordal_core::serial::{format_complex, parse_complex, round_sig, round_sig_complex};
use chordal_core::C64;

pub const DIGITS: usize = 15;

pub fn to_value<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(round(serde_json::to_value(v)?))
}

pub fn complex(c: C64) -> Value {
    // Adding zero maps −0 to +0.
    Value::String(format_complex(
        round_sig_complex(c, DIGITS) + C64::new(0.0, 0.0),
    ))
}

pub fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|c| complex(*c)).collect())
}

/// Round numbers and complex-number strings throughout a JSON tree.
pub fn round(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => serde_json::Number::from_f64(round_sig(x, DIGITS) + 0.0)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            _ => Value::Number(n),
        },
        Value::String(s) => match parse_complex(&s) {
            // Only strings in the exact complex output format are rewritten.
            Ok(c) if format_complex(c) == s => complex(c),
            _ => Value::String(s),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round(v))).collect()),
        other => other,
    }
}

/// Print to stdout; a closed pipe on the reading side is not an error.
pub fn print(v: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(&round(v.clone()))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
