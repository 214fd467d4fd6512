//! The model domains and their invariant geometry.
//!
//! Four domains are modeled: the unit disc 𝔻, the upper half-plane ℍ, the
//! unit ball 𝔹ₙ and the Siegel upper half-space
//! ℍₙ = {Im z₁ > ‖z̃‖²}, z̃ = (z₂, …, zₙ). The Cayley map
//! C(z) = ((z₁−i)/(z₁+i), 2z₂/(z₁+i), …) identifies ℍₙ with 𝔹ₙ and sends ∞
//! to e₁. In dimension one a Siegel point is a half-plane point and a ball
//! point is a disc point; constructors normalize the tag accordingly.
//!
//! The metric uses the curvature −1 normalization: |v|_{𝔻,z} = 2|v|/(1−|z|²)
//! and |v|_{ℍ,z} = |v|/Im z. On ℍₙ the squared length of w is wᵀ g w̄ with g
//! the Bergman matrix below; on 𝔹ₙ vectors are transported to ℍₙ through the
//! differential of C⁻¹, so the Siegel closed forms are the only source of
//! truth for the metric.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result, C64, I};

/// Points closer than this to the boundary (in the defining function) are
/// rejected.
pub const INTERIOR_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Disc,
    HalfPlane,
    Ball(usize),
    Siegel(usize),
}

impl Domain {
    /// Dimension-one balls and Siegel domains are the disc and half-plane.
    pub fn canonical(self) -> Domain {
        match self {
            Domain::Ball(1) => Domain::Disc,
            Domain::Siegel(1) => Domain::HalfPlane,
            d => d,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Domain::Disc | Domain::HalfPlane => 1,
            Domain::Ball(n) | Domain::Siegel(n) => n,
        }
    }

    /// Siegel-type domains: ℍ and ℍₙ.
    pub fn is_siegel(self) -> bool {
        matches!(self, Domain::HalfPlane | Domain::Siegel(_))
    }

    /// Ball-type domains: 𝔻 and 𝔹ₙ.
    pub fn is_ball(self) -> bool {
        matches!(self, Domain::Disc | Domain::Ball(_))
    }

    /// The Siegel-type domain of dimension `n`.
    pub fn siegel(n: usize) -> Domain {
        Domain::Siegel(n).canonical()
    }

    /// The ball-type domain of dimension `n`.
    pub fn ball(n: usize) -> Domain {
        Domain::Ball(n).canonical()
    }

    /// Image of this domain under the Cayley map (or its inverse).
    pub fn cayley_partner(self) -> Domain {
        match self {
            Domain::Disc => Domain::HalfPlane,
            Domain::HalfPlane => Domain::Disc,
            Domain::Ball(n) => Domain::Siegel(n),
            Domain::Siegel(n) => Domain::Ball(n),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Domain::Disc => "disc",
            Domain::HalfPlane => "half-plane",
            Domain::Ball(_) => "ball",
            Domain::Siegel(_) => "siegel",
        }
    }

    /// Domain from a tag and a dimension, the inverse of [`Domain::tag`].
    pub fn from_tag(tag: &str, n: usize) -> Result<Domain> {
        let d = match tag {
            "disc" => Domain::Disc,
            "half-plane" | "halfplane" => Domain::HalfPlane,
            "ball" => Domain::Ball(n),
            "siegel" => Domain::Siegel(n),
            other => return Err(Error::InvalidArgument(format!("unknown domain `{other}`"))),
        }
        .canonical();
        if d.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                found: n,
            });
        }
        Ok(d)
    }

    /// Value of the defining function; positive exactly on the domain.
    pub fn margin(self, coords: &[C64]) -> f64 {
        if self.is_siegel() {
            coords[0].im - norm_sq(&coords[1..])
        } else {
            1.0 - norm_sq(coords)
        }
    }

    pub fn contains(self, coords: &[C64]) -> bool {
        coords.len() == self.dim()
            && coords.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && self.margin(coords) > INTERIOR_MARGIN
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disc | Domain::HalfPlane => f.write_str(self.tag()),
            Domain::Ball(n) | Domain::Siegel(n) => write!(f, "{}({n})", self.tag()),
        }
    }
}

/// ‖v‖².
pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// p̄ᵀ v.
pub fn conj_dot(p: &[C64], v: &[C64]) -> C64 {
    p.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// An interior point of one of the model domains.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    domain: Domain,
    coords: Vec<C64>,
}

impl DomainPoint {
    pub fn new(domain: Domain, coords: Vec<C64>) -> Result<Self> {
        let domain = domain.canonical();
        if domain.dim() == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        if coords.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: coords.len(),
            });
        }
        if !domain.contains(&coords) {
            return Err(Error::DomainViolation(format!(
                "{} is not an interior point of {domain} (margin {:e})",
                crate::serial::format_complex_list(&coords),
                domain.margin(&coords)
            )));
        }
        Ok(Self { domain, coords })
    }

    /// A point of ℍₙ (or ℍ when `coords` has length one).
    pub fn siegel(coords: Vec<C64>) -> Result<Self> {
        Self::new(Domain::siegel(coords.len()), coords)
    }

    /// A point of 𝔹ₙ (or 𝔻 when `coords` has length one).
    pub fn ball(coords: Vec<C64>) -> Result<Self> {
        Self::new(Domain::ball(coords.len()), coords)
    }

    pub fn half_plane(z: C64) -> Result<Self> {
        Self::new(Domain::HalfPlane, vec![z])
    }

    pub fn disc(z: C64) -> Result<Self> {
        Self::new(Domain::Disc, vec![z])
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.coords
    }

    /// First coordinate.
    pub fn head(&self) -> C64 {
        self.coords[0]
    }

    /// z̃ = (z₂, …, zₙ).
    pub fn tail(&self) -> &[C64] {
        &self.coords[1..]
    }

    /// Defining-function value at this point.
    pub fn margin(&self) -> f64 {
        self.domain.margin(&self.coords)
    }

    /// A point of the same domain.
    pub fn with_coords(&self, coords: Vec<C64>) -> Result<Self> {
        Self::new(self.domain, coords)
    }

    fn require_siegel(&self, what: &str) -> Result<()> {
        if self.domain.is_siegel() {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!(
                "{what} needs a Siegel or half-plane point, got a {} point",
                self.domain
            )))
        }
    }

    fn require_ball(&self, what: &str) -> Result<()> {
        if self.domain.is_ball() {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!(
                "{what} needs a ball or disc point, got a {} point",
                self.domain
            )))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    domain: String,
    #[serde(with = "crate::serial::complex_vec")]
    coords: Vec<C64>,
}

impl Serialize for DomainPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            domain: self.domain.tag().to_string(),
            coords: self.coords.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DomainPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(d)?;
        let domain =
            Domain::from_tag(&repr.domain, repr.coords.len()).map_err(serde::de::Error::custom)?;
        DomainPoint::new(domain, repr.coords).map_err(serde::de::Error::custom)
    }
}

/// A tangent vector attached to an interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: DomainPoint,
    v: Vec<C64>,
}

impl TangentVector {
    pub fn new(base: DomainPoint, v: Vec<C64>) -> Result<Self> {
        if v.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: v.len(),
            });
        }
        Ok(Self { base, v })
    }

    pub fn base(&self) -> &DomainPoint {
        &self.base
    }

    pub fn vector(&self) -> &[C64] {
        &self.v
    }
}

/// Value of a pluricomplex Poisson kernel; strictly negative inside.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct PoissonValue(f64);

impl PoissonValue {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn abs(self) -> f64 {
        self.0.abs()
    }

    /// Radius R of the horosphere E(∞, R) (resp. E(e₁, R)) whose boundary
    /// passes through the point.
    pub fn horosphere_radius(self) -> f64 {
        1.0 / self.0.abs()
    }
}

/// C: ℍₙ → 𝔹ₙ.
pub fn cayley_to_ball(z: &DomainPoint) -> Result<DomainPoint> {
    z.require_siegel("cayley_to_ball")?;
    let d = z.head() + I;
    let mut w = Vec::with_capacity(z.dim());
    w.push((z.head() - I) / d);
    w.extend(z.tail().iter().map(|zk| 2.0 * zk / d));
    DomainPoint::new(z.domain().cayley_partner(), w)
}

/// C⁻¹: 𝔹ₙ → ℍₙ.
pub fn cayley_to_siegel(w: &DomainPoint) -> Result<DomainPoint> {
    w.require_ball("cayley_to_siegel")?;
    let d = 1.0 - w.head();
    let mut z = Vec::with_capacity(w.dim());
    z.push(I * (1.0 + w.head()) / d);
    z.extend(w.tail().iter().map(|wk| I * wk / d));
    DomainPoint::new(w.domain().cayley_partner(), z)
}

/// The differential dC(z) as an n×n matrix (row = component of C).
pub fn cayley_jacobian(z: &DomainPoint) -> Result<DMatrix<C64>> {
    z.require_siegel("cayley_jacobian")?;
    let n = z.dim();
    let d = z.head() + I;
    let d2 = d * d;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = 2.0 * I / d2;
    for k in 1..n {
        m[(k, 0)] = -2.0 * z.coords()[k] / d2;
        m[(k, k)] = 2.0 / d;
    }
    Ok(m)
}

/// The differential d(C⁻¹)(w) at a ball point.
pub fn cayley_inverse_jacobian(w: &DomainPoint) -> Result<DMatrix<C64>> {
    w.require_ball("cayley_inverse_jacobian")?;
    let n = w.dim();
    let d = 1.0 - w.head();
    let d2 = d * d;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = 2.0 * I / d2;
    for k in 1..n {
        m[(k, 0)] = I * w.coords()[k] / d2;
        m[(k, k)] = I / d;
    }
    Ok(m)
}

pub(crate) fn mat_vec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

/// Pluricomplex Poisson kernel with pole at ∞ (Siegel side) or e₁ (ball
/// side): u = −Im z₁ + ‖z̃‖² on ℍₙ and u = −(1−‖z‖²)/|1−z₁|² on 𝔹ₙ.
pub fn poisson(z: &DomainPoint) -> PoissonValue {
    let u = if z.domain().is_siegel() {
        -z.margin()
    } else {
        -z.margin() / (1.0 - z.head()).norm_sqr()
    };
    PoissonValue(u)
}

/// 1/|u(z)|.
pub fn horosphere_radius(z: &DomainPoint) -> f64 {
    poisson(z).horosphere_radius()
}

/// Hermitian positive-definite Bergman matrix of ℍₙ at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    g: DMatrix<C64>,
    base: DomainPoint,
}

impl MetricMatrix {
    /// Wrap an arbitrary matrix; used to run the invariant suites against
    /// alternative metrics.
    pub fn from_parts(g: DMatrix<C64>, base: DomainPoint) -> Result<Self> {
        if g.nrows() != base.dim() || g.ncols() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: g.nrows(),
            });
        }
        Ok(Self { g, base })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn base(&self) -> &DomainPoint {
        &self.base
    }

    /// max |g − g*|.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.g.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((self.g[(j, k)] - self.g[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// Cholesky factorization with a strictly positive real pivot test.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.g.nrows();
        let mut l = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            let mut d = self.g[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[(j, j)] = C64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self.g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / d;
            }
        }
        true
    }

    /// wᵀ g w̄. Returns NaN when the form is negative beyond rounding, which
    /// only happens for a matrix that is not positive definite.
    pub fn quadratic_form(&self, w: &[C64]) -> f64 {
        let n = self.g.nrows();
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for j in 0..n {
            for k in 0..n {
                let term = w[j] * self.g[(j, k)] * w[k].conj();
                scale += term.norm();
                sum += term;
            }
        }
        if sum.re < 0.0 {
            if sum.re >= -1e-12 * scale {
                0.0
            } else {
                f64::NAN
            }
        } else {
            sum.re
        }
    }

    pub fn norm(&self, w: &[C64]) -> f64 {
        self.quadratic_form(w).sqrt()
    }
}

/// Bergman matrix g_{j,k} = −4 ∂²/∂z_j∂z̄_k log(Im z₁ − ‖z̃‖²) in closed form.
pub fn bergman_matrix(z: &DomainPoint) -> Result<MetricMatrix> {
    z.require_siegel("bergman_matrix")?;
    let n = z.dim();
    let u = poisson(z).value();
    let u2 = u * u;
    let c = z.coords();
    let mut g = DMatrix::zeros(n, n);
    g[(0, 0)] = C64::new(1.0 / u2, 0.0);
    for k in 1..n {
        g[(0, k)] = 2.0 * I * c[k] / u2;
        g[(k, 0)] = -2.0 * I * c[k].conj() / u2;
    }
    for j in 1..n {
        for k in 1..n {
            g[(j, k)] = if j == k {
                let rest: f64 = (1..n).filter(|&l| l != j).map(|l| c[l].norm_sqr()).sum();
                C64::new(4.0 * (c[0].im - rest) / u2, 0.0)
            } else {
                4.0 * c[k] * c[j].conj() / u2
            };
        }
    }
    Ok(MetricMatrix { g, base: z.clone() })
}

/// Kobayashi (= Bergman, curvature −1) length of a tangent vector.
pub fn hyperbolic_norm(t: &TangentVector) -> Result<f64> {
    let z = t.base();
    let v = t.vector();
    match z.domain() {
        Domain::Disc => Ok(2.0 * v[0].norm() / z.margin()),
        Domain::HalfPlane => Ok(v[0].norm() / z.head().im),
        Domain::Siegel(_) => Ok(bergman_matrix(z)?.norm(v)),
        Domain::Ball(_) => {
            let s = cayley_to_siegel(z)?;
            let pushed = mat_vec(&cayley_inverse_jacobian(z)?, v);
            Ok(bergman_matrix(&s)?.norm(&pushed))
        }
    }
}

/// Shorthand for `hyperbolic_norm(&TangentVector::new(z, v))`.
pub fn hyperbolic_norm_at(z: &DomainPoint, v: &[C64]) -> Result<f64> {
    hyperbolic_norm(&TangentVector::new(z.clone(), v.to_vec())?)
}
