//! Numerical checks of semigroup properties along flows.

use serde::Serialize;

use super::maps::SelfMap;
use super::{flow_displacement, flow_endpoint, integrate_autonomous};
use crate::domain::{hyperbolic_norm_at, poisson, DomainPoint};
use crate::fields::Field;
use crate::geodesics::{geodesic_point, GeodesicParam};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupReport {
    /// ‖Φ_{t+s}(z₀) − Φ_t(Φ_s(z₀))‖ (Euclidean).
    pub residual: f64,
    /// 10·tol·(t + s).
    pub bound: f64,
    pub holds: bool,
}

/// Compare Φ_{t+s}(z₀) with Φ_t(Φ_s(z₀)).
pub fn semigroup_check<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    s: f64,
    tol: f64,
) -> Result<SemigroupReport> {
    let direct = flow_endpoint(g, z0, t + s, tol)?;
    let composed = flow_endpoint(g, &flow_endpoint(g, z0, s, tol)?, t, tol)?;
    let residual = direct
        .coords()
        .iter()
        .zip(composed.coords())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let bound = 10.0 * tol * (t + s);
    Ok(SemigroupReport {
        residual,
        bound,
        holds: residual <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JuliaReport {
    pub samples: usize,
    pub abs_u_start: f64,
    pub abs_u_end: f64,
    /// Smallest change of |u| between consecutive samples.
    pub min_increment: f64,
}

/// Check that |u(Φ_t(z₀))| is nondecreasing along the accepted steps on
/// [0, T], allowing a decrease of 10·tol·max(1, |u|) per step.
pub fn julia_monotonicity<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<JuliaReport> {
    let traj = integrate_autonomous(g, z0, t, tol)?;
    let u = traj.abs_u();
    let mut min_increment = f64::INFINITY;
    for k in 1..u.len() {
        let inc = u[k] - u[k - 1];
        min_increment = min_increment.min(inc);
        if inc < -10.0 * tol * u[k - 1].max(1.0) {
            return Err(Error::MonotonicityViolation {
                t_start: traj.times[k - 1],
                t_end: traj.times[k],
                u_start: u[k - 1],
                u_end: u[k],
            });
        }
    }
    Ok(JuliaReport {
        samples: u.len(),
        abs_u_start: u[0],
        abs_u_end: u[u.len() - 1],
        min_increment: if u.len() > 1 { min_increment } else { 0.0 },
    })
}

/// c·(t + ∫₀ᵗ √(1 + c²s²) ds)/u², with the integral in closed form.
pub fn displacement_bound(c: f64, t: f64, u: f64) -> f64 {
    let integral = if c == 0.0 {
        t
    } else {
        t * (1.0 + c * c * t * t).sqrt() / 2.0 + (c * t).asinh() / (2.0 * c)
    };
    c * (t + integral) / (u * u)
}

/// Slack of the displacement bound check.
pub const DISPLACEMENT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Check ‖Φ_t(z₀) − z₀‖_{z₀} ≤ c·(t + ∫₀ᵗ√(1+c²s²)ds)/u(z₀)² for a field in
/// the class with constant c and a starting point with |u(z₀)| ≥ 1.
pub fn displacement_bound_check<F: Field + ?Sized>(
    g: &F,
    c: f64,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<BoundReport> {
    let u = poisson(z0).value();
    if u.abs() < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "the displacement bound needs |u(z0)| >= 1, got {}",
            u.abs()
        )));
    }
    let d = flow_displacement(g, z0, t, tol)?;
    let lhs = hyperbolic_norm_at(z0, &d)?;
    let rhs = displacement_bound(c, t, u);
    if lhs > rhs + DISPLACEMENT_SLACK {
        return Err(Error::BoundViolation {
            what: "hyperbolic displacement of the flow".into(),
            lhs,
            rhs,
        });
    }
    Ok(BoundReport {
        lhs,
        rhs,
        slack: DISPLACEMENT_SLACK,
    })
}

/// `count` points on the horosphere |u| = 1: φ_γ(x + i) for x spread over
/// [−4, 4] and γ cycling through directions and radii up to 1.75.
pub fn pn_boundary_samples(n: usize, count: usize) -> Result<Vec<DomainPoint>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let x = -4.0 + 8.0 * (k % 8) as f64 / 7.0;
            let zeta = C64::new(x, 1.0);
            let mut gamma = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
            if n >= 2 {
                let r = 0.25 * (k / 8) as f64;
                gamma[k % (n - 1)] = C64::from_polar(r, k as f64 * golden);
            }
            geodesic_point(&GeodesicParam::new(gamma), zeta)
        })
        .collect()
}

/// Absolute slack on |u(f(z))| ≤ 1 + c.
pub const HOROSPHERE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorosphereReport {
    pub max_abs_u: f64,
    pub bound: f64,
    #[serde(with = "crate::serial::complex_vec")]
    pub witness: Vec<C64>,
    pub samples: usize,
}

/// Check |u(f(z))| ≤ 1 + c at sample points with |u(z)| = 1.
pub fn pn_horosphere_check<M: SelfMap + ?Sized>(
    f: &M,
    c: f64,
    samples: &[DomainPoint],
) -> Result<HorosphereReport> {
    use rayon::prelude::*;
    let values: Vec<f64> = samples
        .par_iter()
        .map(|z| Ok(poisson(&f.apply(z)?).abs()))
        .collect::<Result<_>>()?;
    let (k, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| {
            if v > bv {
                (k, v)
            } else {
                (bk, bv)
            }
        });
    let bound = 1.0 + c;
    if max > bound + HOROSPHERE_SLACK * bound {
        return Err(Error::BoundViolation {
            what: "|u| of the image of a unit-horosphere point".into(),
            lhs: max,
            rhs: bound,
        });
    }
    Ok(HorosphereReport {
        max_abs_u: max,
        bound,
        witness: samples[k].coords().to_vec(),
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{parse_field, VectorField};
    use crate::flows::maps::{FlowMap, Identity};
    use crate::I;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn semigroup_examples() {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
        let r = semigroup_check(&VectorField::Example1, &z0, 0.5, 0.5, 1e-10).unwrap();
        assert!(r.residual < 1e-9 && r.holds, "{r:?}");
        let r = semigroup_check(&VectorField::Example1, &z0, 0.0, 0.0, 1e-10).unwrap();
        assert_eq!(r.residual, 0.0);
        let g = parse_field("-z", 1).unwrap();
        let r = semigroup_check(
            &g,
            &DomainPoint::disc(c(0.3, 0.0)).unwrap(),
            1.0,
            2.0,
            1e-10,
        )
        .unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
    }

    #[test]
    fn julia_examples() {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
        let r = julia_monotonicity(&VectorField::Example1, &z0, 2.0, 1e-10).unwrap();
        assert!(r.abs_u_end > r.abs_u_start);
        let z0 = DomainPoint::siegel(vec![c(0.0, 2.0), c(0.0, 0.0)]).unwrap();
        let r = julia_monotonicity(&VectorField::Example2, &z0, 1.0, 1e-10).unwrap();
        assert!((r.abs_u_end - 6f64.sqrt()).abs() < 1e-8);
        let r = julia_monotonicity(&VectorField::Zero(2), &z0, 1.0, 1e-10).unwrap();
        assert_eq!(r.abs_u_end, r.abs_u_start);
        // Moving toward the boundary decreases |u|.
        let out = parse_field("-i; 0", 2).unwrap();
        assert!(matches!(
            julia_monotonicity(&out, &z0, 1.0, 1e-10),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn bound_formula() {
        let expected = 2.0 * (1.0 + 5f64.sqrt() / 2.0 + 2f64.asinh() / 4.0) / 4.0;
        assert!((displacement_bound(2.0, 1.0, -2.0) - expected).abs() < 1e-15);
        assert_eq!(displacement_bound(0.0, 1.0, -1.0), 0.0);
        assert_eq!(displacement_bound(2.0, 0.0, -1.0), 0.0);
    }

    #[test]
    fn bound_examples() {
        let z0 = DomainPoint::siegel(vec![c(0.0, 2.0), c(0.0, 0.0)]).unwrap();
        let r = displacement_bound_check(&VectorField::Example2, 2.0, &z0, 1.0, 1e-10).unwrap();
        assert!((r.lhs - (6f64.sqrt() - 2.0) / 2.0).abs() < 1e-9);
        let r = displacement_bound_check(&VectorField::Example2, 2.0, &z0, 0.0, 1e-10).unwrap();
        assert_eq!(r.lhs, 0.0);
        let r = displacement_bound_check(&VectorField::Zero(2), 0.0, &z0, 1.0, 1e-10).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let small = DomainPoint::siegel(vec![c(0.0, 0.5), c(0.0, 0.0)]).unwrap();
        assert!(displacement_bound_check(&VectorField::Example2, 2.0, &small, 1.0, 1e-10).is_err());
        let fast = parse_field("-10/z1; 0", 2).unwrap();
        assert!(matches!(
            displacement_bound_check(&fast, 0.1, &z0, 1.0, 1e-10),
            Err(Error::BoundViolation { .. })
        ));
    }

    #[test]
    fn boundary_samples_lie_on_unit_horosphere() {
        for n in 1..4 {
            let s = pn_boundary_samples(n, 64).unwrap();
            assert_eq!(s.len(), 64);
            for z in &s {
                assert!((poisson(z).abs() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn horosphere_examples() {
        let s = pn_boundary_samples(2, 64).unwrap();
        let f = FlowMap::new(Arc::new(VectorField::Example2), 1.0, 1e-10).unwrap();
        let r = pn_horosphere_check(&f, 2.0, &s).unwrap();
        assert!(r.max_abs_u <= 3.0);
        let r = pn_horosphere_check(&Identity, 0.0, &s).unwrap();
        assert!((r.max_abs_u - 1.0).abs() < 1e-14);
        let s1 = pn_boundary_samples(1, 64).unwrap();
        let f = FlowMap::new(Arc::new(VectorField::Reciprocal1D), 1.0, 1e-10).unwrap();
        let r = pn_horosphere_check(&f, 1.0, &s1).unwrap();
        assert!(r.max_abs_u <= 2.0);
    }
}
