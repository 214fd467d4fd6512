//! Holomorphic vector fields.
//!
//! A [`VectorField`] is either a list of parsed component expressions or one
//! of the built-in closed forms. Everything that the analysis and flow code
//! consumes goes through the [`Field`] trait, so wrapped evaluators (Cayley
//! pushforwards, slices, displacement fields of self-maps) plug in the same
//! way as parsed fields.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{self, DomainPoint};
use crate::{Error, Result, C64, I};

pub use expr::Expr;

/// A holomorphic map z ↦ ℂⁿ evaluated on raw coordinates.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[C64]) -> Result<Vec<C64>>;
}

impl<F: Field + ?Sized> Field for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        (**self).eval(z)
    }
}

impl<F: Field + ?Sized> Field for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        (**self).eval(z)
    }
}

impl<F: Field + ?Sized> Field for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        (**self).eval(z)
    }
}

fn check_len(expected: usize, z: &[C64]) -> Result<()> {
    if z.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: z.len(),
        })
    }
}

fn nonzero(z: C64, what: &str) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        Err(Error::FieldEvaluation(format!("{what} vanishes")))
    } else {
        Ok(z)
    }
}

/// One atom `m·δ_u` of a discrete measure on ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub u: f64,
    pub m: f64,
}

/// Finite nonnegative measure on ℝ given by its atoms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !a.u.is_finite() || !a.m.is_finite() || a.m < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "atom (u = {}, m = {}) must have finite location and finite nonnegative mass",
                    a.u, a.m
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// Mass `m` at each location `u`, from `(u, m)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(u, m)| Atom { u, m }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// μ(ℝ).
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.m).sum()
    }
}

impl TryFrom<Vec<Atom>> for DiscreteMeasure {
    type Error = Error;
    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<DiscreteMeasure> for Vec<Atom> {
    fn from(m: DiscreteMeasure) -> Self {
        m.atoms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorField {
    /// Parsed component expressions; the dimension is the component count.
    Expr(Vec<Expr>),
    /// (0, −i·z₂/z₁) on ℍ₂.
    Example1,
    /// (−1/z₁, z₂/(2z₁²)) on ℍ₂.
    Example2,
    /// −1/z on ℍ.
    Reciprocal1D,
    Zero(usize),
    /// (τ − z)(1 − τ̄z)·p(z) on 𝔻.
    BerksonPorta {
        tau: C64,
        p: Box<VectorField>,
    },
    /// Σ mₖ/(uₖ − z) on ℍ.
    Cauchy(DiscreteMeasure),
}

impl VectorField {
    /// Built-in field by name: `example1`, `example2`, `reciprocal`, `zero`.
    /// `n` is only used by `zero`.
    pub fn builtin(name: &str, n: usize) -> Result<VectorField> {
        match name {
            "example1" => Ok(VectorField::Example1),
            "example2" => Ok(VectorField::Example2),
            "reciprocal" => Ok(VectorField::Reciprocal1D),
            "zero" => Ok(VectorField::Zero(n.max(1))),
            other => Err(Error::InvalidArgument(format!(
                "unknown built-in field `{other}` (expected example1, example2, reciprocal or zero)"
            ))),
        }
    }
}

impl Field for VectorField {
    fn dim(&self) -> usize {
        match self {
            VectorField::Expr(e) => e.len(),
            VectorField::Example1 | VectorField::Example2 => 2,
            VectorField::Reciprocal1D
            | VectorField::BerksonPorta { .. }
            | VectorField::Cauchy(_) => 1,
            VectorField::Zero(n) => *n,
        }
    }

    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), z)?;
        match self {
            VectorField::Expr(es) => es.iter().map(|e| e.eval(z)).collect(),
            VectorField::Example1 => {
                let z1 = nonzero(z[0], "z1")?;
                Ok(vec![C64::new(0.0, 0.0), -I * z[1] / z1])
            }
            VectorField::Example2 => {
                let z1 = nonzero(z[0], "z1")?;
                Ok(vec![-1.0 / z1, z[1] / (2.0 * z1 * z1)])
            }
            VectorField::Reciprocal1D => Ok(vec![-1.0 / nonzero(z[0], "z")?]),
            VectorField::Zero(n) => Ok(vec![C64::new(0.0, 0.0); *n]),
            VectorField::BerksonPorta { tau, p } => {
                let pz = p.eval(z)?[0];
                Ok(vec![(tau - z[0]) * (1.0 - tau.conj() * z[0]) * pz])
            }
            VectorField::Cauchy(m) => {
                let mut sum = C64::new(0.0, 0.0);
                for a in m.atoms() {
                    sum += a.m / nonzero(C64::new(a.u, 0.0) - z[0], "u - z")?;
                }
                Ok(vec![sum])
            }
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Expr(es) => f.write_str(&expr::print_components(es)),
            VectorField::Example1 => f.write_str("builtin:example1"),
            VectorField::Example2 => f.write_str("builtin:example2"),
            VectorField::Reciprocal1D => f.write_str("builtin:reciprocal"),
            VectorField::Zero(n) => write!(f, "builtin:zero({n})"),
            VectorField::BerksonPorta { tau, p } => write!(
                f,
                "({} - z)*(1 - {}*z)*({p})",
                crate::serial::format_complex(*tau),
                crate::serial::format_complex(tau.conj())
            ),
            VectorField::Cauchy(m) => write!(f, "cauchy({} atoms)", m.atoms().len()),
        }
    }
}

/// Parse `n` semicolon-separated component expressions.
pub fn parse_field(text: &str, n: usize) -> Result<VectorField> {
    Ok(VectorField::Expr(expr::parse_components(text, n)?))
}

/// Evaluate a field at a domain point, checking dimensions.
pub fn eval_field<F: Field + ?Sized>(h: &F, z: &DomainPoint) -> Result<Vec<C64>> {
    check_len(h.dim(), z.coords())?;
    h.eval(z.coords())
}

/// Sample points for the Re p ≥ 0 spot check: a sunflower spiral in |z| < 0.99.
pub fn disc_probe_points(count: usize) -> Vec<C64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let r = 0.99 * ((k as f64 + 0.5) / count as f64).sqrt();
            C64::from_polar(r, k as f64 * golden)
        })
        .collect()
}

/// Berkson–Porta generator G(z) = (τ − z)(1 − τ̄z)p(z) on the disc.
///
/// Fails with [`Error::HalfPlaneCondition`] if Re p < −1e−12 at one of 100
/// probe points.
pub fn berkson_porta(tau: C64, p: VectorField) -> Result<VectorField> {
    let g = berkson_porta_unchecked(tau, p)?;
    if let VectorField::BerksonPorta { p, .. } = &g {
        for z in disc_probe_points(100) {
            let value = p.eval(&[z])?[0].re;
            if value < -1e-12 {
                return Err(Error::HalfPlaneCondition { at: z, value });
            }
        }
    }
    Ok(g)
}

/// [`berkson_porta`] without the sampled Re p ≥ 0 check.
pub fn berkson_porta_unchecked(tau: C64, p: VectorField) -> Result<VectorField> {
    if !(tau.norm() <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "|tau| = {} exceeds 1",
            tau.norm()
        )));
    }
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: p.dim(),
        });
    }
    Ok(VectorField::BerksonPorta {
        tau,
        p: Box::new(p),
    })
}

/// Cauchy transform H(z) = Σ mₖ/(uₖ − z) of a discrete measure.
pub fn cauchy_transform(m: DiscreteMeasure) -> VectorField {
    VectorField::Cauchy(m)
}

/// Field built from a closure.
pub struct FnField<F> {
    n: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> Field for FnField<F>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n, z)?;
        (self.f)(z)
    }
}

/// Ball-side field G(w) = dC(C⁻¹w)·H(C⁻¹w) of a Siegel-side field H.
pub struct BallPushforward<F>(pub F);

impl<F: Field> Field for BallPushforward<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, w: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), w)?;
        let z = domain::cayley_to_siegel(&DomainPoint::ball(w.to_vec())?)?;
        let h = self.0.eval(z.coords())?;
        Ok(domain::mat_vec(&domain::cayley_jacobian(&z)?, &h))
    }
}

/// Siegel-side field H(z) = d(C⁻¹)(Cz)·G(Cz) of a ball-side field G.
pub struct SiegelPullback<F>(pub F);

impl<F: Field> Field for SiegelPullback<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), z)?;
        let w = domain::cayley_to_ball(&DomainPoint::siegel(z.to_vec())?)?;
        let g = self.0.eval(w.coords())?;
        Ok(domain::mat_vec(&domain::cayley_inverse_jacobian(&w)?, &g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn builtin_values() {
        let v = VectorField::Example2.eval(&[I, c(0.5, 0.0)]).unwrap();
        assert!(close(v[0], I, 1e-15));
        assert!(close(v[1], c(-0.25, 0.0), 1e-15));
        let v = VectorField::Reciprocal1D.eval(&[I]).unwrap();
        assert!(close(v[0], I, 1e-15));
        let v = VectorField::Example1
            .eval(&[c(0.0, 2.0), c(1.0, 0.0)])
            .unwrap();
        assert!(close(v[0], c(0.0, 0.0), 0.0));
        assert!(close(v[1], c(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn parsed_example_fields_match_builtins() {
        let h = parse_field("0; -i*z2/z1", 2).unwrap();
        let z = [c(0.3, 1.7), c(-0.4, 0.2)];
        let a = h.eval(&z).unwrap();
        let b = VectorField::Example1.eval(&z).unwrap();
        assert!(close(a[1], b[1], 1e-15));
        let h = parse_field("-1/z", 1).unwrap();
        assert!(close(
            h.eval(&[c(0.2, 0.9)]).unwrap()[0],
            VectorField::Reciprocal1D.eval(&[c(0.2, 0.9)]).unwrap()[0],
            0.0
        ));
    }

    #[test]
    fn eval_field_checks_dimension() {
        let z = DomainPoint::half_plane(I).unwrap();
        assert!(matches!(
            eval_field(&VectorField::Example1, &z),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(eval_field(&VectorField::Reciprocal1D, &z).is_ok());
    }

    #[test]
    fn berkson_porta_examples() {
        let one = parse_field("1", 1).unwrap();
        let g = berkson_porta(c(0.0, 0.0), one.clone()).unwrap();
        assert!(close(
            g.eval(&[c(0.5, 0.0)]).unwrap()[0],
            c(-0.5, 0.0),
            1e-15
        ));
        let g = berkson_porta(c(1.0, 0.0), one).unwrap();
        assert!(close(
            g.eval(&[c(0.0, 0.0)]).unwrap()[0],
            c(1.0, 0.0),
            1e-15
        ));
        let g = berkson_porta(c(0.0, 0.0), parse_field("1 + z", 1).unwrap()).unwrap();
        assert!(close(
            g.eval(&[c(0.5, 0.0)]).unwrap()[0],
            c(-0.75, 0.0),
            1e-15
        ));
    }

    #[test]
    fn berkson_porta_rejects_bad_p() {
        let p = parse_field("-1 + z", 1).unwrap();
        assert!(matches!(
            berkson_porta(c(0.0, 0.0), p.clone()),
            Err(Error::HalfPlaneCondition { .. })
        ));
        assert!(berkson_porta_unchecked(c(0.0, 0.0), p).is_ok());
        let one = parse_field("1", 1).unwrap();
        assert!(matches!(
            berkson_porta(c(1.5, 0.0), one),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cauchy_examples() {
        let h = cauchy_transform(DiscreteMeasure::from_pairs(&[(0.0, 1.0)]).unwrap());
        assert!(close(h.eval(&[I]).unwrap()[0], I, 1e-15));
        let h = cauchy_transform(DiscreteMeasure::from_pairs(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap());
        assert!(close(h.eval(&[I]).unwrap()[0], c(0.0, 0.5), 1e-15));
        let h = cauchy_transform(DiscreteMeasure::default());
        assert_eq!(h.eval(&[I]).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn measure_json() {
        let m: DiscreteMeasure =
            serde_json::from_str(r#"[{"u": -1, "m": 0.5}, {"u": 1, "m": 0.5}]"#).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"[{"u": 0, "m": -1}]"#).is_err());
    }

    #[test]
    fn pushforward_of_reciprocal_at_origin() {
        // C⁻¹(0) = i, C'(i) = −i/2, H(i) = i, so G(0) = 1/2.
        let g = BallPushforward(VectorField::Reciprocal1D);
        assert!(close(
            g.eval(&[c(0.0, 0.0)]).unwrap()[0],
            c(0.5, 0.0),
            1e-15
        ));
        let back = SiegelPullback(BallPushforward(VectorField::Example2));
        let z = [c(0.3, 2.0), c(0.5, 0.4)];
        let a = back.eval(&z).unwrap();
        let b = VectorField::Example2.eval(&z).unwrap();
        assert!(close(a[0], b[0], 1e-13) && close(a[1], b[1], 1e-13));
    }

    #[test]
    fn zero_field_pushes_forward_to_zero() {
        let g = BallPushforward(VectorField::Zero(2));
        assert_eq!(
            g.eval(&[c(0.1, 0.2), c(-0.3, 0.0)]).unwrap(),
            vec![c(0.0, 0.0); 2]
        );
    }
}
