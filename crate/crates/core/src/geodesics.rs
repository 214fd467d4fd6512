//! Normalized complex geodesics of ℍₙ through ∞.
//!
//! For γ ∈ ℂⁿ⁻¹ the map φ_γ(ζ) = (ζ + i‖γ‖², γ) embeds ℍ isometrically into
//! ℍₙ with u(φ_γ(ζ)) = −Im ζ. The affine retraction
//! P(z) = (z₁ − 2iγ̄ᵀz̃ + 2i‖γ‖², γ) satisfies P∘P = P and P∘φ_γ = φ_γ, and
//! compressing a field H along it gives the slice
//! h_γ(ζ) = H₁(φ_γ(ζ)) − 2iγ̄ᵀH̃(φ_γ(ζ)).

use serde::{Deserialize, Serialize};

use crate::domain::{conj_dot, norm_sq, poisson, DomainPoint};
use crate::fields::{eval_field, Field};
use crate::{Error, Result, C64, I};

/// The parameter γ ∈ ℂⁿ⁻¹ of the geodesic φ_γ in ℍₙ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeodesicParam {
    #[serde(with = "crate::serial::complex_vec")]
    gamma: Vec<C64>,
}

impl GeodesicParam {
    pub fn new(gamma: Vec<C64>) -> Self {
        Self { gamma }
    }

    /// The axis geodesic γ = 0 in ℍₙ.
    pub fn axis(n: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); n.saturating_sub(1)])
    }

    pub fn gamma(&self) -> &[C64] {
        &self.gamma
    }

    /// Dimension n of the ambient Siegel domain.
    pub fn dim(&self) -> usize {
        self.gamma.len() + 1
    }

    /// ‖γ‖².
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.gamma)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            })
        }
    }
}

/// φ_γ(ζ) = (ζ + i‖γ‖², γ).
pub fn geodesic_point(g: &GeodesicParam, zeta: C64) -> Result<DomainPoint> {
    DomainPoint::half_plane(zeta)?;
    let mut coords = Vec::with_capacity(g.dim());
    coords.push(zeta + I * g.norm_sq());
    coords.extend_from_slice(g.gamma());
    DomainPoint::siegel(coords)
}

/// The unique (γ, ζ) with φ_γ(ζ) = w: γ = w̃ and ζ = w₁ − i‖w̃‖².
pub fn geodesic_through(w: &DomainPoint) -> Result<(GeodesicParam, C64)> {
    require_siegel(w)?;
    let g = GeodesicParam::new(w.tail().to_vec());
    let zeta = w.head() - I * g.norm_sq();
    DomainPoint::half_plane(zeta)?;
    Ok((g, zeta))
}

fn require_siegel(z: &DomainPoint) -> Result<()> {
    if z.domain().is_siegel() {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "expected a Siegel point, got a {} point",
            z.domain()
        )))
    }
}

/// The projection P onto φ_γ(ℍ).
pub fn project(g: &GeodesicParam, z: &DomainPoint) -> Result<DomainPoint> {
    require_siegel(z)?;
    g.check_dim(z.dim())?;
    let mut coords = Vec::with_capacity(z.dim());
    coords.push(z.head() - 2.0 * I * conj_dot(g.gamma(), z.tail()) + 2.0 * I * g.norm_sq());
    coords.extend_from_slice(g.gamma());
    DomainPoint::siegel(coords)
}

/// h_γ(ζ) = H₁(φ_γ(ζ)) − 2iγ̄ᵀH̃(φ_γ(ζ)).
pub fn slice_value<F: Field + ?Sized>(h: &F, g: &GeodesicParam, zeta: C64) -> Result<C64> {
    g.check_dim(h.dim())?;
    let z = geodesic_point(g, zeta)?;
    let v = eval_field(h, &z)?;
    Ok(v[0] - 2.0 * I * conj_dot(g.gamma(), &v[1..]))
}

/// The slice ζ ↦ h_γ(ζ) as a one-dimensional field.
pub struct SliceField<F> {
    field: F,
    gamma: GeodesicParam,
}

impl<F: Field> SliceField<F> {
    pub fn new(field: F, gamma: GeodesicParam) -> Result<Self> {
        gamma.check_dim(field.dim())?;
        Ok(Self { field, gamma })
    }

    pub fn gamma(&self) -> &GeodesicParam {
        &self.gamma
    }
}

impl<F: Field> Field for SliceField<F> {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: z.len(),
            });
        }
        Ok(vec![slice_value(&self.field, &self.gamma, z[0])?])
    }
}

/// Splitting of H(z) by the differential of the projection through z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceDecomposition {
    /// dP(z)·H(z) = (H₁ − 2iz̄̃ᵀH̃, 0, …, 0).
    #[serde(with = "crate::serial::complex_vec")]
    pub tangential: Vec<C64>,
    /// H(z) − dP(z)·H(z) = (2iz̄̃ᵀH̃, H̃).
    #[serde(with = "crate::serial::complex_vec")]
    pub orthogonal: Vec<C64>,
    /// h_γ(ζ) for the geodesic through z.
    #[serde(rename = "slice", with = "crate::serial::complex_str")]
    pub slice_value: C64,
    pub base: DomainPoint,
}

pub fn decompose<F: Field + ?Sized>(h: &F, z: &DomainPoint) -> Result<SliceDecomposition> {
    require_siegel(z)?;
    let v = eval_field(h, z)?;
    Ok(decompose_vector(z, &v))
}

/// Decomposition of an arbitrary tangent vector `v` at `z`.
pub fn decompose_vector(z: &DomainPoint, v: &[C64]) -> SliceDecomposition {
    let n = z.dim();
    let cross = 2.0 * I * conj_dot(z.tail(), &v[1..]);
    let mut tangential = vec![C64::new(0.0, 0.0); n];
    tangential[0] = v[0] - cross;
    let mut orthogonal = Vec::with_capacity(n);
    orthogonal.push(cross);
    orthogonal.extend_from_slice(&v[1..]);
    SliceDecomposition {
        slice_value: tangential[0],
        tangential,
        orthogonal,
        base: z.clone(),
    }
}

/// Closed form of ‖(a, 0)‖ at z: |a|/|u(z)|.
pub fn tangential_norm(z: &DomainPoint, a: C64) -> f64 {
    a.norm() / poisson(z).abs()
}

/// Closed form of ‖(2ip̄ᵀv, v)‖ at z:
/// 2·√(‖v‖²|u| + |(p − z̃)*v|²)/|u|.
pub fn orthogonal_norm(z: &DomainPoint, p: &[C64], v: &[C64]) -> f64 {
    let u = poisson(z).abs();
    let diff: Vec<C64> = p.iter().zip(z.tail()).map(|(a, b)| a - b).collect();
    2.0 * (norm_sq(v) * u + conj_dot(&diff, v).norm_sqr()).sqrt() / u
}
