//! Command-line syntax for fields, points, geodesic parameters and drivers.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use chordal_core::domain::{Domain, DomainPoint};
use chordal_core::fields::{self, DiscreteMeasure, Field, VectorField};
use chordal_core::flows::{HerglotzField, Piece};
use chordal_core::geodesics::GeodesicParam;
use chordal_core::serial;

/// One way of specifying a vector field.
#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Field components separated by ';' ("0; -i*z2/z1"), or
    /// builtin:example1 | builtin:example2 | builtin:reciprocal | builtin:zero
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Discrete measure for a Cauchy transform: inline JSON
    /// `[{"u": -1, "m": 0.5}, ...]` or `@path` to a JSON file
    #[arg(long, conflicts_with = "field")]
    pub measure: Option<String>,
    /// Berkson–Porta point τ in the closed disc (with --p)
    #[arg(long, requires = "p", conflicts_with_all = ["field", "measure"], allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// Berkson–Porta factor p(z) with Re p ≥ 0 (with --tau)
    #[arg(long, requires = "tau", allow_hyphen_values = true)]
    pub p: Option<String>,
}

impl FieldArgs {
    /// The field, with `n` used for `builtin:zero` and to check dimensions.
    pub fn resolve(&self, n: Option<usize>) -> Result<VectorField> {
        let field = if let Some(text) = &self.field {
            parse_field_spec(text, n)?
        } else if let Some(m) = &self.measure {
            fields::cauchy_transform(parse_measure(m)?)
        } else if let (Some(tau), Some(p)) = (&self.tau, &self.p) {
            let tau = serial::parse_complex(tau).context("parsing --tau")?;
            fields::berkson_porta(tau, fields::parse_field(p, 1).context("parsing --p")?)?
        } else {
            bail!(usage("one of --field, --measure or --tau/--p is required"));
        };
        if let Some(n) = n {
            if field.dim() != n {
                bail!(usage(&format!(
                    "field has {} components but the point has {n}",
                    field.dim()
                )));
            }
        }
        Ok(field)
    }
}

/// Marker for errors that are caller mistakes rather than numerical failures.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: &str) -> Usage {
    Usage(msg.to_string())
}

/// `builtin:<name>` or semicolon-separated component expressions.
pub fn parse_field_spec(text: &str, n: Option<usize>) -> Result<VectorField> {
    if let Some(name) = text.trim().strip_prefix("builtin:") {
        return Ok(VectorField::builtin(name.trim(), n.unwrap_or(2))?);
    }
    let count = n.unwrap_or_else(|| text.split(';').count());
    fields::parse_field(text, count).with_context(|| format!("parsing field `{text}`"))
}

pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let json = match text.strip_prefix('@') {
        Some(path) => {
            fs::read_to_string(path).with_context(|| format!("reading measure file {path}"))?
        }
        None => text.to_string(),
    };
    serde_json::from_str(&json).map_err(|e| usage(&format!("invalid measure: {e}")).into())
}

/// Default domain tag for a point of dimension `n`.
pub fn domain_for(tag: Option<&str>, n: usize) -> Result<Domain> {
    Ok(Domain::from_tag(tag.unwrap_or("siegel"), n)?)
}

pub fn parse_point(text: &str, domain: Option<&str>) -> Result<DomainPoint> {
    let coords = serial::parse_point(text).with_context(|| format!("parsing point `{text}`"))?;
    if coords.is_empty() {
        bail!(usage("a point needs at least one coordinate"));
    }
    let d = domain_for(domain, coords.len())?;
    Ok(DomainPoint::new(d, coords)?)
}

/// Geodesic parameters: `;` separates parameters and `,` separates the
/// coordinates of one parameter ("1, 0; 0, i" for n = 3). When no `;` is
/// present and the dimension is 2, `,` separates parameters instead
/// ("0, 1, 1+i").
pub fn parse_gammas(text: &str, n: usize) -> Result<Vec<GeodesicParam>> {
    let groups: Vec<&str> = if text.contains(';') || n > 2 {
        text.split(';').collect()
    } else {
        text.split(',').collect()
    };
    groups
        .iter()
        .map(|g| {
            let gamma = serial::parse_point(g)
                .with_context(|| format!("parsing geodesic parameter `{g}`"))?;
            if gamma.len() + 1 != n {
                bail!(usage(&format!(
                    "geodesic parameter `{}` needs {} coordinate(s)",
                    g.trim(),
                    n - 1
                )));
            }
            Ok(GeodesicParam::new(gamma))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct PieceSpec {
    t0: f64,
    t1: f64,
    field: String,
}

/// Read a `pieces.json` driver: `[{"t0": 0, "t1": 1, "field": "-1/z"}, ...]`.
pub fn read_driver(path: &Path, n: usize) -> Result<HerglotzField> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading driver {}", path.display()))?;
    let specs: Vec<PieceSpec> = serde_json::from_str(&text)
        .map_err(|e| usage(&format!("invalid driver {}: {e}", path.display())))?;
    let pieces = specs
        .into_iter()
        .map(|s| {
            let field: Arc<dyn Field> = Arc::new(parse_field_spec(&s.field, Some(n))?);
            Ok(Piece {
                t0: s.t0,
                t1: s.t1,
                field,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HerglotzField::new(pieces)?)
}
