//! Self-maps, their iteration and their capacity.

use std::sync::Arc;

use serde::Serialize;

use crate::analysis::{estimate_capacity_1d, CapacityEstimate, CapacityWindow};
use crate::domain::{poisson, Domain, DomainPoint};
use crate::fields::{Field, VectorField};
use crate::{Error, Result, C64};

/// A holomorphic self-map of one of the model domains.
pub trait SelfMap: Send + Sync {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint>;

    /// f(z) − z. Implementations may compute this more accurately than by
    /// subtraction.
    fn displacement(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        let w = self.apply(z)?;
        Ok(w.coords()
            .iter()
            .zip(z.coords())
            .map(|(a, b)| a - b)
            .collect())
    }
}

impl<M: SelfMap + ?Sized> SelfMap for Arc<M> {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        (**self).apply(z)
    }
    fn displacement(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        (**self).displacement(z)
    }
}

impl<M: SelfMap + ?Sized> SelfMap for &M {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        (**self).apply(z)
    }
    fn displacement(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        (**self).displacement(z)
    }
}

/// The time-t map Φ_t of the semigroup generated by a field.
#[derive(Clone)]
pub struct FlowMap {
    field: Arc<dyn Field>,
    t: f64,
    tol: f64,
}

impl FlowMap {
    pub fn new(field: Arc<dyn Field>, t: f64, tol: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "flow time must be nonnegative, got {t}"
            )));
        }
        super::Options::new(tol)?;
        Ok(Self { field, t, tol })
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

impl SelfMap for FlowMap {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        super::flow_endpoint(self.field.as_ref(), z, self.t, self.tol)
    }

    fn displacement(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        super::flow_displacement(self.field.as_ref(), z, self.t, self.tol)
    }
}

/// The map z ↦ F(z) given by the values of a field (for instance a parsed
/// expression list). Images outside the domain are errors.
#[derive(Debug, Clone)]
pub struct ExprMap {
    components: VectorField,
}

impl ExprMap {
    pub fn new(components: VectorField) -> Self {
        Self { components }
    }
}

impl SelfMap for ExprMap {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        let w = crate::fields::eval_field(&self.components, z)?;
        DomainPoint::new(z.domain(), w)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl SelfMap for Identity {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        Ok(z.clone())
    }
}

/// outer ∘ inner.
#[derive(Clone)]
pub struct Compose {
    outer: Arc<dyn SelfMap>,
    inner: Arc<dyn SelfMap>,
}

impl Compose {
    pub fn of(outer: Arc<dyn SelfMap>, inner: Arc<dyn SelfMap>) -> Self {
        Self { outer, inner }
    }
}

impl SelfMap for Compose {
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        self.outer.apply(&self.inner.apply(z)?)
    }

    fn displacement(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        let mid = self.inner.apply(z)?;
        let d1 = self.inner.displacement(z)?;
        let d2 = self.outer.displacement(&mid)?;
        Ok(d1.iter().zip(&d2).map(|(a, b)| a + b).collect())
    }
}

/// Self-map given by a closure.
pub struct FnMap<F>(pub F);

impl<F> SelfMap for FnMap<F>
where
    F: Fn(&DomainPoint) -> Result<DomainPoint> + Send + Sync,
{
    fn apply(&self, z: &DomainPoint) -> Result<DomainPoint> {
        (self.0)(z)
    }
}

/// The field H = f − id of a self-map f on a fixed domain.
pub struct DisplacementField<M> {
    map: M,
    domain: Domain,
}

impl<M: SelfMap> DisplacementField<M> {
    pub fn new(map: M, domain: Domain) -> Self {
        Self {
            map,
            domain: domain.canonical(),
        }
    }
}

impl<M: SelfMap> Field for DisplacementField<M> {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.map
            .displacement(&DomainPoint::new(self.domain, z.to_vec())?)
    }
}

/// Window used for capacities of self-maps. Beyond y ≈ 10⁴ the displacement
/// of a map evaluated by subtraction loses too many digits.
pub const MAP_CAPACITY_WINDOW: CapacityWindow = CapacityWindow {
    y_min: 1.0,
    y_max: 1e4,
    count: 64,
};

/// l(f) for a half-plane self-map f(z) = z − l/z + …, estimated from the
/// field f − id.
pub fn extract_capacity<M: SelfMap>(f: M) -> Result<CapacityEstimate> {
    estimate_capacity_1d(
        &DisplacementField::new(f, Domain::HalfPlane),
        MAP_CAPACITY_WINDOW,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DwDiagnostic {
    DivergesToInfinity,
    ConvergedInterior,
    Inconclusive,
}

/// |u| above which iterates are reported as escaping to the boundary point.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
/// Last-step displacement, relative to 1 + ‖z‖, counted as a fixed point.
pub const CONVERGENCE_STEP: f64 = 1e-10;
/// Relative decrease of |u| tolerated by the monotonicity test.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    /// f^k(z₀) for k = 0, …, N.
    pub points: Vec<DomainPoint>,
    /// |u(f^k(z₀))|.
    pub abs_u: Vec<f64>,
    /// Whether |u| never decreased (up to rounding).
    pub monotone: bool,
    pub diagnostic: DwDiagnostic,
}

impl IterationReport {
    pub fn last(&self) -> &DomainPoint {
        self.points
            .last()
            .expect("iteration reports are never empty")
    }
}

fn diagnose(points: &[DomainPoint], abs_u: &[f64], threshold: f64) -> (bool, DwDiagnostic) {
    let monotone = abs_u
        .windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - MONOTONE_SLACK));
    let n = abs_u.len() - 1;
    let last_u = abs_u[n];
    if monotone && last_u > threshold {
        return (monotone, DwDiagnostic::DivergesToInfinity);
    }
    if n >= 1 {
        let a = points[n - 1].coords();
        let b = points[n].coords();
        let step: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let size: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if step <= CONVERGENCE_STEP * (1.0 + size) {
            return (monotone, DwDiagnostic::ConvergedInterior);
        }
    }
    if monotone && n >= 8 {
        let late = abs_u[n] - abs_u[n / 2];
        let early = abs_u[n / 2] - abs_u[n / 4];
        if early > 0.0 && late >= 0.9 * early {
            return (monotone, DwDiagnostic::DivergesToInfinity);
        }
    }
    (monotone, DwDiagnostic::Inconclusive)
}

/// Iterate f from z₀ N times and classify the orbit.
///
/// `diverges_to_infinity` means |u| never decreased and either exceeded
/// `threshold` or kept growing without slowing down (the last half of the
/// orbit gained at least 90% of what the preceding quarter gained);
/// `converged_interior` means the final step was negligible.
pub fn iterate_map<M: SelfMap + ?Sized>(
    f: &M,
    z0: &DomainPoint,
    n: usize,
    threshold: f64,
) -> Result<IterationReport> {
    let mut points = Vec::with_capacity(n + 1);
    points.push(z0.clone());
    for _ in 0..n {
        let next = f.apply(points.last().expect("nonempty"))?;
        points.push(next);
    }
    let abs_u: Vec<f64> = points.iter().map(|p| poisson(p).abs()).collect();
    let (monotone, diagnostic) = diagnose(&points, &abs_u, threshold);
    Ok(IterationReport {
        points,
        abs_u,
        monotone,
        diagnostic,
    })
}
