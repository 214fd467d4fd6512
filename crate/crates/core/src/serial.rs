//! Text formats shared by the library and the CLI.
//!
//! Complex numbers are written as `"a+bi"` / `"a-bi"` with decimal literals.
//! Points are written at the command line as `"(a+bi, c+di, ...)"`; parsing
//! goes through the constant-expression subset of the field grammar, so
//! `"i"`, `"2i"`, `"-0.5"` and `"1e-3-2i"` are all accepted.

use serde::{Deserialize, Deserializer, Serializer};

use crate::fields::expr;
use crate::{Error, Result, C64};

/// Decimal rendering of a real number that round-trips exactly.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_complex(c: C64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_real(c.re), sign, format_real(c.im.abs()))
}

/// `"(a+bi, c+di)"` rendering of a coordinate list.
pub fn format_complex_list(v: &[C64]) -> String {
    let items: Vec<String> = v.iter().map(|c| format_complex(*c)).collect();
    format!("({})", items.join(", "))
}

/// Round to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

pub fn round_sig_complex(c: C64, digits: usize) -> C64 {
    C64::new(round_sig(c.re, digits), round_sig(c.im, digits))
}

/// Parse a single complex constant such as `"0.5-2i"` or `"i"`.
pub fn parse_complex(text: &str) -> Result<C64> {
    expr::parse_constant(text)
}

/// Parse a point literal `"(a, b, ...)"`. The parentheses are optional.
pub fn parse_point(text: &str) -> Result<Vec<C64>> {
    let trimmed = text.trim();
    let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
        (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
        (None, None) => trimmed,
        _ => {
            return Err(Error::Syntax {
                offset: 0,
                message: "unbalanced parentheses around point".into(),
            })
        }
    };
    parse_complex_list(inner)
}

/// Parse a comma-separated list of complex constants.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_complex).collect()
}

/// Serde adapter: a complex number as an `"a+bi"` string.
pub mod complex_str {
    use super::*;

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(*c))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let text = String::deserialize(d)?;
        parse_complex(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a complex vector as a JSON array of `"a+bi"` strings.
pub mod complex_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for c in v {
            seq.serialize_element(&format_complex(*c))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        items
            .iter()
            .map(|t| parse_complex(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
