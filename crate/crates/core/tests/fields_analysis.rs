use chordal_core::analysis::{
    capacity_additivity_check, check_pn_inequality, check_pointwise_1d, estimate_capacity_1d,
    half_plane_grid, membership_ball_pushforward, membership_siegel, siegel_coarse_grid,
    siegel_grid, CapacityWindow, Trend, Verdict, DEFAULT_CAPACITY_WINDOW,
};
use chordal_core::domain::{cayley_to_siegel, DomainPoint};
use chordal_core::fields::{
    berkson_porta, cauchy_transform, parse_field, BallPushforward, DiscreteMeasure, Field,
    VectorField,
};
use chordal_core::{Error, C64, I};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-3.0..3.0f64, 0.01..2.0f64), 1..6)
        .prop_map(|atoms| DiscreteMeasure::from_pairs(&atoms).unwrap())
}

proptest! {
    #[test]
    fn parsed_expressions_agree_with_direct_evaluation(x in -3.0..3.0f64, y in 0.01..3.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let z = [c(x, y), c(a, b)];
        let h = parse_field("exp(i*z1)*z2^2 - 1/(z1 + 2i); sqrt(z1)*log(z1) + z2/z1^3", 2).unwrap();
        let v = h.eval(&z).unwrap();
        let e0 = (I * z[0]).exp() * z[1] * z[1] - 1.0 / (z[0] + 2.0 * I);
        let e1 = z[0].sqrt() * z[0].ln() + z[1] / (z[0] * z[0] * z[0]);
        prop_assert!((v[0] - e0).norm() <= 1e-13 * (1.0 + e0.norm()));
        prop_assert!((v[1] - e1).norm() <= 1e-13 * (1.0 + e1.norm()));
    }

    #[test]
    fn cauchy_transforms_are_nevanlinna_with_capacity_equal_to_mass(m in measure(), x in -10.0..10.0f64, ly in -2.0..3.0f64) {
        let mass = m.total_mass();
        let h = cauchy_transform(m);
        let v = h.eval(&[c(x, 10f64.powf(ly))]).unwrap()[0];
        prop_assert!(v.im >= 0.0);
        let est = estimate_capacity_1d(&h, DEFAULT_CAPACITY_WINDOW).unwrap();
        prop_assert!((est.value - mass).abs() < 1e-6);
        prop_assert_eq!(est.trend, Trend::Converged);
    }
}

#[test]
fn pushforward_is_the_cayley_differential_applied_to_the_field() {
    // G(w) = dC(z)·H(z) with z = C⁻¹(w), written out for n = 2.
    for w in [
        vec![c(0.1, 0.2), c(-0.3, 0.1)],
        vec![c(0.0, 0.0), c(0.5, 0.0)],
        vec![c(-0.6, 0.0), c(0.0, 0.2)],
    ] {
        let wp = DomainPoint::ball(w.clone()).unwrap();
        let z = cayley_to_siegel(&wp).unwrap().into_coords();
        let h = VectorField::Example2.eval(&z).unwrap();
        let d = z[0] + I;
        let expected = [
            2.0 * I * h[0] / (d * d),
            2.0 * h[1] / d - 2.0 * z[1] * h[0] / (d * d),
        ];
        let got = BallPushforward(VectorField::Example2).eval(&w).unwrap();
        for k in 0..2 {
            assert!(
                (got[k] - expected[k]).norm() < 1e-13,
                "{got:?} vs {expected:?}"
            );
        }
    }
    let g0 = BallPushforward(VectorField::Reciprocal1D)
        .eval(&[c(0.0, 0.0)])
        .unwrap()[0];
    assert!((g0 - c(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn reciprocal_field_class_boundary() {
    let h = parse_field("-1/z", 1).unwrap();
    let grid = half_plane_grid();
    assert_eq!(
        check_pointwise_1d(&h, 1.0, &grid).unwrap().verdict,
        Verdict::Consistent
    );
    assert_eq!(
        check_pointwise_1d(&h, 0.99, &grid).unwrap().verdict,
        Verdict::Violated
    );
    // Im H < 0 somewhere fails the class regardless of c.
    let bad = parse_field("1/z", 1).unwrap();
    let r = check_pointwise_1d(&bad, 10.0, &grid).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert!(r.min_im.unwrap() < 0.0);
}

#[test]
fn capacity_trend_detects_growth() {
    let h = parse_field("-1/sqrt(z)", 1).unwrap();
    let est = estimate_capacity_1d(&h, DEFAULT_CAPACITY_WINDOW).unwrap();
    assert_eq!(est.trend, Trend::Increasing);
}

#[test]
fn example_memberships_on_the_default_grid() {
    let grid = siegel_grid(2).unwrap();
    let r2 = membership_siegel(&VectorField::Example2, 2.0, &grid).unwrap();
    assert_eq!(r2.verdict, Verdict::Consistent);
    assert!(r2.sup * r2.sup <= 4.0 * (1.0 + 1e-9));
    for cap in [1.0, 7.0, 100.0] {
        let r1 = membership_siegel(&VectorField::Example1, cap, &grid).unwrap();
        assert_eq!(r1.verdict, Verdict::Violated);
    }
    let coarse = siegel_coarse_grid(2).unwrap();
    let ball = membership_ball_pushforward(VectorField::Example2, 2.0, &coarse).unwrap();
    assert_eq!(ball.verdict, Verdict::Consistent);
}

#[test]
fn pn_inequality_separates_fields() {
    let grid = siegel_coarse_grid(2).unwrap();
    assert!(
        check_pn_inequality(&VectorField::Zero(2), &grid)
            .unwrap()
            .holds
    );
    // A purely tangential push in z₂ breaks ‖H̃‖² ≤ |H₁ − 2i z̄₂H₂|.
    let h = parse_field("0; 1", 2).unwrap();
    assert!(!check_pn_inequality(&h, &grid).unwrap().holds);
}

#[test]
fn additivity_report_fields() {
    let r = capacity_additivity_check(&[1.0, 2.0], 3.0005, 1e-3);
    assert!(r.holds);
    assert!(!capacity_additivity_check(&[1.0, 2.0], 3.01, 1e-3).holds);
}

#[test]
fn berkson_porta_requires_nonnegative_real_part() {
    let g = berkson_porta(c(0.0, 0.0), parse_field("1 + z", 1).unwrap()).unwrap();
    assert!((g.eval(&[c(0.5, 0.0)]).unwrap()[0] - c(-0.75, 0.0)).norm() < 1e-15);
    assert!(matches!(
        berkson_porta(c(0.0, 0.0), parse_field("z", 1).unwrap()),
        Err(Error::HalfPlaneCondition { .. })
    ));
}

#[test]
fn capacity_window_is_validated() {
    assert!(CapacityWindow::new(0.0, 10.0, 16).is_err());
    assert!(CapacityWindow::new(1.0, 10.0, 2).is_err());
}
