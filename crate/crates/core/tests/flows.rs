use std::sync::Arc;

use chordal_core::domain::{poisson, DomainPoint};
use chordal_core::fields::{cauchy_transform, parse_field, DiscreteMeasure, Field, VectorField};
use chordal_core::flows::{
    displacement_bound, displacement_bound_check, extract_capacity, flow_endpoint,
    integrate_autonomous, integrate_loewner, integrate_sampled, iterate_map, julia_monotonicity,
    semigroup_check, Compose, DwDiagnostic, ExprMap, FlowMap, HerglotzField, Identity, Piece,
    SelfMap, DIVERGENCE_THRESHOLD,
};
use chordal_core::{Error, C64, I};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const TOL: f64 = 1e-10;

/// Flow of builtin example2: z₁(t) = √(z₁² − 2t) in ℍ, z₂(t) = z₂·√(z₁(0)/z₁(t)).
fn example2_flow(z: &[C64], t: f64) -> [C64; 2] {
    let mut z1 = (z[0] * z[0] - 2.0 * t).sqrt();
    if z1.im < 0.0 {
        z1 = -z1;
    }
    [z1, z[1] * (z[0] / z1).sqrt()]
}

/// Single-atom Cauchy flow z' = m/(u − z): (u − z)² = (u − z₀)² − 2mt with
/// u − z in the lower half-plane.
fn one_atom_flow(u: f64, m: f64, z0: C64, t: f64) -> C64 {
    let d = ((u - z0) * (u - z0) - 2.0 * m * t).sqrt();
    u - if d.im > 0.0 { -d } else { d }
}

fn siegel2() -> impl Strategy<Value = Vec<C64>> {
    (
        -2.0..2.0f64,
        0.0..1.0f64,
        0.0..std::f64::consts::TAU,
        0.05..3.0f64,
    )
        .prop_map(|(x, r, th, m)| {
            let z2 = C64::from_polar(r, th);
            vec![c(x, r * r + m), z2]
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn example1_flow_matches_closed_form(z in siegel2(), t in 0.0..3.0f64) {
        let z0 = DomainPoint::siegel(z.clone()).unwrap();
        let end = flow_endpoint(&VectorField::Example1, &z0, t, TOL).unwrap();
        let exact = [z[0], (-I * t / z[0]).exp() * z[1]];
        for (a, b) in end.coords().iter().zip(&exact) {
            prop_assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn example2_flow_matches_closed_form(z in siegel2(), t in 0.0..3.0f64) {
        let z0 = DomainPoint::siegel(z.clone()).unwrap();
        let end = flow_endpoint(&VectorField::Example2, &z0, t, TOL).unwrap();
        let exact = example2_flow(&z, t);
        for (a, b) in end.coords().iter().zip(&exact) {
            prop_assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn one_atom_cauchy_flow_matches_closed_form(u in -2.0..2.0f64, m in 0.1..2.0f64, x in -2.0..2.0f64, y in 0.1..3.0f64, t in 0.0..2.0f64) {
        let h = cauchy_transform(DiscreteMeasure::from_pairs(&[(u, m)]).unwrap());
        let z0 = c(x, y);
        let end = flow_endpoint(&h, &DomainPoint::half_plane(z0).unwrap(), t, TOL).unwrap();
        let exact = one_atom_flow(u, m, z0, t);
        prop_assert!((end.head() - exact).norm() < 1e-8 * (1.0 + exact.norm()));
    }

    #[test]
    fn julia_lemma_along_random_cauchy_flows(
        atoms in prop::collection::vec((-3.0..3.0f64, 0.05..1.0f64), 1..5),
        x in -3.0..3.0f64,
        y in 0.05..2.0f64,
    ) {
        let h = cauchy_transform(DiscreteMeasure::from_pairs(&atoms).unwrap());
        let r = julia_monotonicity(&h, &DomainPoint::half_plane(c(x, y)).unwrap(), 2.0, TOL);
        prop_assert!(r.is_ok(), "{r:?}");
    }
}

#[test]
fn disc_linear_flow() {
    let g = parse_field("-z", 1).unwrap();
    for (z, t) in [(c(0.5, 0.0), 1.0), (c(-0.3, 0.6), 2.5)] {
        let end = flow_endpoint(&g, &DomainPoint::disc(z).unwrap(), t, TOL).unwrap();
        assert!((end.head() - z * (-t).exp()).norm() < 1e-8);
    }
}

#[test]
fn sampled_trajectory_hits_requested_times() {
    let z0 = DomainPoint::half_plane(I).unwrap();
    let times = [0.0, 0.25, 0.5, 1.0];
    let traj = integrate_sampled(&VectorField::Reciprocal1D, &z0, 1.0, TOL, &times).unwrap();
    assert_eq!(traj.times, times);
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let exact = I * (1.0 + 2.0 * t).sqrt();
        assert!((p.head() - exact).norm() < 1e-8);
    }
}

#[test]
fn semigroup_law_for_the_examples() {
    let z0 = DomainPoint::siegel(vec![c(0.2, 1.5), c(0.3, -0.4)]).unwrap();
    for h in [VectorField::Example1, VectorField::Example2] {
        for (t, s) in [(0.5, 0.5), (0.1, 1.7)] {
            let r = semigroup_check(&h, &z0, t, s, TOL).unwrap();
            assert!(r.holds && r.residual < 1e-9, "{r:?}");
        }
    }
}

#[test]
fn julia_violation_is_reported_for_an_expanding_field() {
    // z ↦ z + t·i would be fine; H = −i pushes towards the boundary.
    let h = parse_field("-i", 1).unwrap();
    let z0 = DomainPoint::half_plane(c(0.0, 2.0)).unwrap();
    assert!(matches!(
        julia_monotonicity(&h, &z0, 1.0, TOL),
        Err(Error::MonotonicityViolation { .. })
    ));
}

#[test]
fn displacement_bound_closed_form_against_quadrature() {
    // c(t + ∫₀ᵗ √(1 + c²s²) ds)/u² with Simpson's rule on 2000 panels.
    let (cap, t, u) = (2.0f64, 1.3f64, -2.5f64);
    let f = |s: f64| (1.0 + cap * cap * s * s).sqrt();
    let n = 2000;
    let h = t / n as f64;
    let mut sum = f(0.0) + f(t);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    let integral = sum * h / 3.0;
    let expected = cap * (t + integral) / (u * u);
    assert!((displacement_bound(cap, t, u) - expected).abs() < 1e-12);
}

#[test]
fn displacement_bound_holds_for_example2() {
    for z in [
        vec![c(0.0, 2.0), c(0.0, 0.0)],
        vec![c(0.0, 3.0), c(0.5, 0.0)],
        vec![c(1.0, 5.0), c(0.5, 1.0)],
    ] {
        let z0 = DomainPoint::siegel(z).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let r = displacement_bound_check(&VectorField::Example2, 2.0, &z0, t, TOL).unwrap();
            assert!(r.lhs <= r.rhs + r.slack, "{r:?}");
        }
    }
}

#[test]
fn loewner_two_piece_endpoint() {
    let hs = HerglotzField::new(vec![
        Piece {
            t0: 0.0,
            t1: 1.0,
            field: Arc::new(parse_field("-1/z", 1).unwrap()),
        },
        Piece {
            t0: 1.0,
            t1: 2.0,
            field: Arc::new(parse_field("-2/z", 1).unwrap()),
        },
    ])
    .unwrap();
    let traj = integrate_loewner(&hs, &DomainPoint::half_plane(I).unwrap(), 2.0, TOL).unwrap();
    assert!((traj.endpoint().head() - I * 7f64.sqrt()).norm() < 1e-8);
    assert!(matches!(
        integrate_loewner(&hs, &DomainPoint::half_plane(I).unwrap(), 3.0, TOL),
        Err(Error::CoverageGap { .. })
    ));
}

#[test]
fn herglotz_pieces_must_tile_the_interval() {
    let f: Arc<dyn Field> = Arc::new(VectorField::Reciprocal1D);
    let gap = HerglotzField::new(vec![
        Piece {
            t0: 0.0,
            t1: 1.0,
            field: f.clone(),
        },
        Piece {
            t0: 1.5,
            t1: 2.0,
            field: f.clone(),
        },
    ]);
    assert!(matches!(gap, Err(Error::CoverageGap { .. })));
    let overlap = HerglotzField::new(vec![
        Piece {
            t0: 0.0,
            t1: 1.0,
            field: f.clone(),
        },
        Piece {
            t0: 0.5,
            t1: 2.0,
            field: f,
        },
    ]);
    assert!(overlap.is_err());
}

#[test]
fn flow_capacity_is_linear_in_time() {
    let m = DiscreteMeasure::from_pairs(&[(-1.0, 0.5), (0.5, 0.25), (2.0, 1.0)]).unwrap();
    let mass = m.total_mass();
    let h: Arc<dyn Field> = Arc::new(cauchy_transform(m));
    for t in [0.5, 1.0, 2.0] {
        let l = extract_capacity(FlowMap::new(h.clone(), t, 1e-12).unwrap())
            .unwrap()
            .value;
        assert!((l - t * mass).abs() < 1e-3, "t = {t}: {l}");
    }
}

#[test]
fn capacity_is_additive_under_composition() {
    let f: Arc<dyn SelfMap> = Arc::new(ExprMap::new(parse_field("sqrt(z^2 - 2)", 1).unwrap()));
    let l = extract_capacity(f.clone()).unwrap().value;
    assert!((l - 1.0).abs() < 1e-3);
    let l2 = extract_capacity(Compose::of(f.clone(), f)).unwrap().value;
    assert!((l2 - 2.0 * l).abs() < 1e-3);
    assert!(extract_capacity(Identity).unwrap().value.abs() < 1e-12);
}

#[test]
fn denjoy_wolff_orbit_of_example2_escapes() {
    let f = FlowMap::new(Arc::new(VectorField::Example2), 1.0, TOL).unwrap();
    let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
    let r = iterate_map(&f, &z0, 2000, DIVERGENCE_THRESHOLD).unwrap();
    assert_eq!(r.diagnostic, DwDiagnostic::DivergesToInfinity);
    assert!(r.monotone);
    // |u| grows like √(2k): z₁ after k steps is √(z₁² − 2k).
    let k = 2000.0;
    let z1 = (I * I - 2.0 * k).sqrt();
    let z2 = 0.5 * (I / z1).sqrt();
    let expected_u = z2.norm_sqr() - z1.im;
    assert!((poisson(r.last()).value() - expected_u).abs() < 1e-6 * expected_u.abs());
}

#[test]
fn identity_orbits_are_inconclusive() {
    let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
    let r = iterate_map(&Identity, &z0, 10, DIVERGENCE_THRESHOLD).unwrap();
    assert_ne!(r.diagnostic, DwDiagnostic::DivergesToInfinity);
}

#[test]
fn flow_leaving_the_domain_underflows() {
    // z' = −i reaches the real axis at t = Im z₀.
    let h = parse_field("-i", 1).unwrap();
    let r = integrate_autonomous(&h, &DomainPoint::half_plane(c(0.0, 0.5)).unwrap(), 1.0, TOL);
    assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })), "{r:?}");
}
