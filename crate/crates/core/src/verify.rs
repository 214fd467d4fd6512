//! Invariant suites behind `chordal verify`.
//!
//! Each suite is a list of named groups; a group evaluates one invariant on
//! seeded random samples or fixed fixtures and records the worst error
//! against a pinned tolerance. Reports contain no timestamps and groups are
//! collected in a fixed order, so a given (suite, seed) always produces the
//! same report.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, CapacityWindow, Verdict};
use crate::domain::{self, conj_dot, norm_sq, poisson, DomainPoint, MetricMatrix};
use crate::fields::{self, expr, BallPushforward, Field, VectorField};
use crate::flows::{self, integrator, FlowMap, HerglotzField, Piece, SelfMap};
use crate::geodesics::{self, GeodesicParam, SliceField};
use crate::sampling;
use crate::{Error, Result, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Metric,
    Geodesics,
    Classes,
    Flows,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Metric => "metric",
            Suite::Geodesics => "geodesics",
            Suite::Classes => "classes",
            Suite::Flows => "flows",
        }
    }

    fn includes(self, module: Suite) -> bool {
        self == Suite::All || self == module
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "metric" => Suite::Metric,
            "geodesics" => Suite::Geodesics,
            "classes" => Suite::Classes,
            "flows" => Suite::Flows,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown suite `{other}` (expected all, metric, geodesics, classes or flows)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub name: &'static str,
    pub suite: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Largest observed error; `null` in JSON when an evaluation produced NaN.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub groups: Vec<GroupReport>,
}

impl VerifyReport {
    pub fn failed_groups(&self) -> impl Iterator<Item = &GroupReport> {
        self.groups.iter().filter(|g| !g.passed)
    }
}

/// Source of the Bergman matrix used by the metric-dependent groups.
pub type MetricProvider = dyn Fn(&DomainPoint) -> Result<MetricMatrix> + Sync;

struct Ctx<'a> {
    seed: u64,
    metric: &'a MetricProvider,
}

impl Ctx<'_> {
    fn rng(&self, stream: u64) -> rand_chacha::ChaCha8Rng {
        sampling::rng(self.seed, stream)
    }

    /// ‖w‖ at a Siegel point through the configured metric.
    fn norm(&self, z: &DomainPoint, w: &[C64]) -> Result<f64> {
        Ok((self.metric)(z)?.norm(w))
    }
}

struct Acc {
    name: &'static str,
    suite: &'static str,
    tolerance: f64,
    samples: usize,
    failures: usize,
    max_error: f64,
    first_error: Option<String>,
}

impl Acc {
    fn new(name: &'static str, suite: Suite, tolerance: f64) -> Self {
        Self {
            name,
            suite: suite.name(),
            tolerance,
            samples: 0,
            failures: 0,
            max_error: 0.0,
            first_error: None,
        }
    }

    fn record(&mut self, r: Result<f64>) {
        self.samples += 1;
        match r {
            Ok(e) => {
                if !self.max_error.is_nan() && (e.is_nan() || e > self.max_error) {
                    self.max_error = e;
                }
                if !(e <= self.tolerance) {
                    self.failures += 1;
                }
            }
            Err(err) => {
                self.failures += 1;
                if self.first_error.is_none() {
                    self.first_error = Some(err.to_string());
                }
            }
        }
    }

    fn check(&mut self, ok: bool) {
        self.record(Ok(if ok { 0.0 } else { 1.0 }));
    }

    fn finish(self) -> GroupReport {
        GroupReport {
            name: self.name,
            suite: self.suite,
            samples: self.samples,
            failures: self.failures,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.failures == 0 && self.samples > 0,
            first_error: self.first_error,
        }
    }
}

/// |a − b| / |b| (absolute when b = 0).
fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn vec_norm(a: &[C64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Ball metric in closed form, independent of the Siegel transport:
/// ‖v‖² = 4[(1 − |w|²)‖v‖² + |⟨v, w⟩|²]/(1 − |w|²)².
pub fn ball_norm_closed_form(w: &[C64], v: &[C64]) -> f64 {
    let d = 1.0 - norm_sq(w);
    (4.0 * (d * norm_sq(v) + conj_dot(w, v).norm_sqr())).sqrt() / d
}

type GroupFn = fn(&Ctx) -> GroupReport;

const METRIC_GROUPS: &[GroupFn] = &[
    cayley_round_trip,
    poisson_transfer,
    bergman_hermitian_positive,
    metric_cayley_invariance,
    norm_tangential_closed_form,
    norm_orthogonal_closed_form,
    pythagoras_orthogonal_split,
    cayley_jacobian_finite_difference,
];

const GEODESIC_GROUPS: &[GroupFn] = &[
    geodesic_normalization,
    geodesic_round_trip,
    projection_idempotence,
    projection_range,
    decomposition_pythagoras,
    decomposition_norm_formulas,
    slice_consistency,
];

const CLASS_GROUPS: &[GroupFn] = &[
    parser_matches_builtin,
    parser_print_fixed_point,
    cauchy_maps_into_closed_half_plane,
    cauchy_capacity_equals_mass,
    cauchy_pointwise_at_capacity,
    pushforward_norm_invariance,
    example1_slice_capacity,
    example2_slice_capacity,
    example2_global_membership,
    example1_global_violation,
    membership_cayley_agreement,
    slices_inherit_global_bound,
    berkson_porta_fixtures,
];

const FLOW_GROUPS: &[GroupFn] = &[
    closed_form_endpoints,
    integrator_order,
    semigroup_law,
    julia_monotonicity,
    displacement_bound,
    horosphere_image_bound,
    pn_inequality_flow_map,
    loewner_fixtures,
    capacity_along_flows,
    capacity_additivity,
    denjoy_wolff_iteration,
];

/// Run a suite with the library's own Bergman matrix.
pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    run_suite_with(suite, seed, &domain::bergman_matrix)
}

/// Run a suite with a substitute metric (used to test the suites themselves).
pub fn run_suite_with(suite: Suite, seed: u64, metric: &MetricProvider) -> VerifyReport {
    let ctx = Ctx { seed, metric };
    let mut groups: Vec<GroupFn> = Vec::new();
    for (module, list) in [
        (Suite::Metric, METRIC_GROUPS),
        (Suite::Geodesics, GEODESIC_GROUPS),
        (Suite::Classes, CLASS_GROUPS),
        (Suite::Flows, FLOW_GROUPS),
    ] {
        if suite.includes(module) {
            groups.extend_from_slice(list);
        }
    }
    let groups: Vec<GroupReport> = groups.par_iter().map(|g| g(&ctx)).collect();
    VerifyReport {
        suite: suite.name(),
        seed,
        passed: groups.iter().all(|g| g.passed),
        groups,
    }
}

/// Run `count` independent samples in parallel, each with its own stream.
fn par_samples<F>(acc: &mut Acc, ctx: &Ctx, stream: u64, count: usize, f: F)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ctx.rng(stream * 1_000_003 + k as u64);
            f(&mut rng)
        })
        .collect();
    for r in results {
        acc.record(r);
    }
}

// ---- metric ----

fn cayley_round_trip(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("cayley_round_trip", Suite::Metric, 1e-12);
    par_samples(&mut acc, ctx, 101, 1000, |rng| {
        let n = 1 + (rand::Rng::gen_range(rng, 0..4usize));
        let z = sampling::siegel_point(rng, n, 1.0, (1e-3, 1e3))?;
        let back = domain::cayley_to_siegel(&domain::cayley_to_ball(&z)?)?;
        Ok(vec_dist(back.coords(), z.coords()) / vec_norm(z.coords()))
    });
    acc.finish()
}

fn poisson_transfer(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("poisson_transfer", Suite::Metric, 1e-12);
    par_samples(&mut acc, ctx, 102, 1000, |rng| {
        let n = 1 + (rand::Rng::gen_range(rng, 0..4usize));
        let z = sampling::siegel_point(rng, n, 1.0, (1e-3, 1e3))?;
        let w = domain::cayley_to_ball(&z)?;
        Ok(rel(poisson(&w).value(), poisson(&z).value()))
    });
    acc.finish()
}

fn bergman_hermitian_positive(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("bergman_hermitian_positive", Suite::Metric, 1e-14);
    par_samples(&mut acc, ctx, 103, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = sampling::siegel_point(rng, n, 1.0, (1e-2, 1e2))?;
        let g = (ctx.metric)(&z)?;
        if !g.is_positive_definite() {
            return Ok(f64::INFINITY);
        }
        let scale = g.matrix().iter().map(|c| c.norm()).fold(0.0, f64::max);
        Ok(g.hermitian_residual() / scale)
    });
    acc.finish()
}

fn metric_cayley_invariance(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("metric_cayley_invariance", Suite::Metric, 1e-10);
    par_samples(&mut acc, ctx, 104, 500, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = sampling::siegel_point(rng, n, 1.0, (1e-2, 1e2))?;
        let v = sampling::complex_vector(rng, n, 1.0);
        let siegel = ctx.norm(&z, &v)?;
        let w = domain::cayley_to_ball(&z)?;
        let pushed = domain::mat_vec(&domain::cayley_jacobian(&z)?, &v);
        Ok(rel(ball_norm_closed_form(w.coords(), &pushed), siegel))
    });
    acc.finish()
}

/// Point with |u| log-uniform in [1e−2, 1e2] and ‖z̃‖ ≤ 1.
fn metric_sample(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Result<DomainPoint> {
    sampling::siegel_point(rng, n, 1.0, (1e-2, 1e2))
}

fn norm_tangential_closed_form(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("norm_tangential_closed_form", Suite::Metric, 1e-12);
    par_samples(&mut acc, ctx, 105, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = metric_sample(rng, n)?;
        let a = sampling::complex_in_square(rng, 1.0);
        let mut w = vec![C64::new(0.0, 0.0); n];
        w[0] = a;
        Ok(rel(ctx.norm(&z, &w)?, geodesics::tangential_norm(&z, a)))
    });
    acc.finish()
}

fn norm_orthogonal_closed_form(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("norm_orthogonal_closed_form", Suite::Metric, 1e-12);
    par_samples(&mut acc, ctx, 106, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = metric_sample(rng, n)?;
        let p = sampling::complex_vector(rng, n - 1, 1.0);
        let v = sampling::complex_vector(rng, n - 1, 1.0);
        let mut w = vec![2.0 * I * conj_dot(&p, &v)];
        w.extend_from_slice(&v);
        Ok(rel(
            ctx.norm(&z, &w)?,
            geodesics::orthogonal_norm(&z, &p, &v),
        ))
    });
    acc.finish()
}

fn pythagoras_orthogonal_split(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("pythagoras_orthogonal_split", Suite::Metric, 1e-12);
    par_samples(&mut acc, ctx, 107, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = metric_sample(rng, n)?;
        let a = sampling::complex_in_square(rng, 1.0);
        let v = sampling::complex_vector(rng, n - 1, 1.0);
        let cross = 2.0 * I * conj_dot(z.tail(), &v);
        let mut tang = vec![C64::new(0.0, 0.0); n];
        tang[0] = a - cross;
        let mut orth = vec![cross];
        orth.extend_from_slice(&v);
        let mut sum = vec![a];
        sum.extend_from_slice(&v);
        let lhs = ctx.norm(&z, &sum)?.powi(2);
        let rhs = ctx.norm(&z, &tang)?.powi(2) + ctx.norm(&z, &orth)?.powi(2);
        Ok(rel(lhs, rhs))
    });
    acc.finish()
}

fn cayley_jacobian_finite_difference(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("cayley_jacobian_finite_difference", Suite::Metric, 1e-6);
    par_samples(&mut acc, ctx, 108, 100, |rng| {
        let n = 1 + rand::Rng::gen_range(rng, 0..4usize);
        let z = sampling::siegel_point(rng, n, 1.0, (1e-1, 1e1))?;
        let jac = domain::cayley_jacobian(&z)?;
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in 0..n {
            let shifted = |s: f64| -> Result<Vec<C64>> {
                let mut c = z.coords().to_vec();
                c[k] += s;
                Ok(domain::cayley_to_ball(&DomainPoint::siegel(c)?)?.into_coords())
            };
            let plus = shifted(h)?;
            let minus = shifted(-h)?;
            for r in 0..n {
                let fd = (plus[r] - minus[r]) / (2.0 * h);
                worst = worst.max((fd - jac[(r, k)]).norm());
            }
        }
        let scale = jac.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Ok(worst / scale)
    });
    acc.finish()
}

// ---- geodesics ----

fn random_gamma(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> GeodesicParam {
    let r = rand::Rng::gen_range(rng, 0.0..=1.5);
    GeodesicParam::new(sampling::vector_with_norm(rng, n - 1, r))
}

fn geodesic_normalization(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("geodesic_normalization", Suite::Geodesics, 1e-14);
    par_samples(&mut acc, ctx, 201, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let g = random_gamma(rng, n);
        let zeta = sampling::half_plane_point(rng, 1e-2, 1e2);
        let z = geodesics::geodesic_point(&g, zeta)?;
        Ok((poisson(&z).value() + zeta.im).abs() / zeta.im.max(1.0))
    });
    acc.finish()
}

fn geodesic_round_trip(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("geodesic_round_trip", Suite::Geodesics, 1e-12);
    par_samples(&mut acc, ctx, 202, 500, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let w = metric_sample(rng, n)?;
        let (g, zeta) = geodesics::geodesic_through(&w)?;
        let back = geodesics::geodesic_point(&g, zeta)?;
        Ok(vec_dist(back.coords(), w.coords()) / vec_norm(w.coords()))
    });
    acc.finish()
}

fn projection_idempotence(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("projection_idempotence", Suite::Geodesics, 1e-13);
    par_samples(&mut acc, ctx, 203, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let g = random_gamma(rng, n);
        let z = metric_sample(rng, n)?;
        let p = geodesics::project(&g, &z)?;
        let pp = geodesics::project(&g, &p)?;
        Ok(vec_dist(pp.coords(), p.coords()) / vec_norm(p.coords()))
    });
    acc.finish()
}

fn projection_range(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("projection_range", Suite::Geodesics, 1e-12);
    par_samples(&mut acc, ctx, 204, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let g = random_gamma(rng, n);
        let z = metric_sample(rng, n)?;
        let p = geodesics::project(&g, &z)?;
        if p.tail() != g.gamma() {
            return Ok(f64::INFINITY);
        }
        // Im P₁ − ‖γ‖² = Im z₁ − ‖z̃‖² + ‖z̃ − γ‖² ≥ Im z₁ − ‖z̃‖².
        let shortfall = (z.margin() - p.margin()).max(0.0);
        Ok(shortfall / p.head().norm().max(1.0))
    });
    acc.finish()
}

/// A field value at z: one of the built-in examples or a random vector.
fn sample_field_value(rng: &mut rand_chacha::ChaCha8Rng, z: &DomainPoint) -> Result<Vec<C64>> {
    let n = z.dim();
    match rand::Rng::gen_range(rng, 0..3u8) {
        0 if n == 2 => VectorField::Example1.eval(z.coords()),
        1 if n == 2 => VectorField::Example2.eval(z.coords()),
        _ => Ok(sampling::complex_vector(rng, n, 1.0)),
    }
}

fn decomposition_pythagoras(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("decomposition_pythagoras", Suite::Geodesics, 1e-12);
    par_samples(&mut acc, ctx, 205, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = metric_sample(rng, n)?;
        let h = sample_field_value(rng, &z)?;
        let d = geodesics::decompose_vector(&z, &h);
        let lhs = ctx.norm(&z, &h)?.powi(2);
        let rhs = ctx.norm(&z, &d.tangential)?.powi(2) + ctx.norm(&z, &d.orthogonal)?.powi(2);
        Ok(rel(lhs, rhs))
    });
    acc.finish()
}

fn decomposition_norm_formulas(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("decomposition_norm_formulas", Suite::Geodesics, 1e-12);
    par_samples(&mut acc, ctx, 206, 1000, |rng| {
        let n = 2 + rand::Rng::gen_range(rng, 0..3usize);
        let z = metric_sample(rng, n)?;
        let h = sample_field_value(rng, &z)?;
        let d = geodesics::decompose_vector(&z, &h);
        let u = poisson(&z).abs();
        let t = rel(ctx.norm(&z, &d.tangential)?, d.slice_value.norm() / u);
        let o = rel(
            ctx.norm(&z, &d.orthogonal)?,
            2.0 * vec_norm(&h[1..]) / u.sqrt(),
        );
        Ok(t.max(o))
    });
    acc.finish()
}

fn slice_consistency(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("slice_consistency", Suite::Geodesics, 1e-13);
    par_samples(&mut acc, ctx, 207, 1000, |rng| {
        let g = random_gamma(rng, 2);
        let zeta = sampling::half_plane_point(rng, 1e-2, 1e2);
        let field = if rand::Rng::gen_bool(rng, 0.5) {
            VectorField::Example1
        } else {
            VectorField::Example2
        };
        let z = geodesics::geodesic_point(&g, zeta)?;
        let d = geodesics::decompose(&field, &z)?;
        let s = geodesics::slice_value(&field, &g, zeta)?;
        Ok((d.tangential[0] - s).norm() / s.norm().max(1e-300))
    });
    acc.finish()
}

// ---- classes ----

fn parser_matches_builtin(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("parser_matches_builtin", Suite::Classes, 1e-15);
    let parsed = [
        (fields::parse_field("0; -i*z2/z1", 2), VectorField::Example1),
        (
            fields::parse_field("-1/z1; z2/(2*z1^2)", 2),
            VectorField::Example2,
        ),
    ];
    for (p, b) in &parsed {
        let Ok(p) = p else {
            acc.record(Err(p.clone().unwrap_err()));
            continue;
        };
        par_samples(&mut acc, ctx, 301, 100, |rng| {
            let z = metric_sample(rng, 2)?;
            let a = p.eval(z.coords())?;
            let e = b.eval(z.coords())?;
            Ok(vec_dist(&a, &e) / vec_norm(&e).max(1e-300))
        });
    }
    acc.finish()
}

const PRINTER_CORPUS: &[(&str, usize)] = &[
    ("0; -i*z2/z1", 2),
    ("-1/z1; z2/(2*z1^2)", 2),
    ("-1/z", 1),
    ("sqrt(z^2 - 2)", 1),
    ("exp(-i*z1)*z2; log(z1) - (z2 - 1)^-3", 2),
    ("1.5e-7i*z1/-z2; --z1 + 2i; (z1*z2)*z3", 3),
    ("((z))", 1),
];

fn parser_print_fixed_point(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("parser_print_fixed_point", Suite::Classes, 0.0);
    for &(text, n) in PRINTER_CORPUS {
        acc.record((|| {
            let once = expr::print_components(&expr::parse_components(text, n)?);
            let twice = expr::print_components(&expr::parse_components(&once, n)?);
            Ok(if once == twice { 0.0 } else { 1.0 })
        })());
    }
    acc.finish()
}

fn seeded_measures(ctx: &Ctx) -> Result<Vec<fields::DiscreteMeasure>> {
    let mut rng = ctx.rng(300);
    (1..=3)
        .map(|k| sampling::measure(&mut rng, 2 * k))
        .collect()
}

fn cauchy_maps_into_closed_half_plane(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("cauchy_maps_into_closed_half_plane", Suite::Classes, 1e-12);
    par_samples(&mut acc, ctx, 302, 1000, |rng| {
        let atoms = 1 + rand::Rng::gen_range(rng, 0..6usize);
        let h = fields::cauchy_transform(sampling::measure(rng, atoms)?);
        let z = sampling::half_plane_point(rng, 1e-2, 1e2);
        Ok((-h.eval(&[z])?[0].im).max(0.0))
    });
    acc.finish()
}

fn cauchy_capacity_equals_mass(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("cauchy_capacity_equals_mass", Suite::Classes, 1e-6);
    match seeded_measures(ctx) {
        Err(e) => acc.record(Err(e)),
        Ok(ms) => {
            for m in ms {
                let mass = m.total_mass();
                let h = fields::cauchy_transform(m);
                acc.record(
                    analysis::estimate_capacity_1d(&h, analysis::DEFAULT_CAPACITY_WINDOW)
                        .map(|e| (e.value - mass).abs()),
                );
            }
        }
    }
    acc.finish()
}

fn cauchy_pointwise_at_capacity(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("cauchy_pointwise_at_capacity", Suite::Classes, 0.0);
    let grid = analysis::half_plane_grid();
    match seeded_measures(ctx) {
        Err(e) => acc.record(Err(e)),
        Ok(ms) => {
            for m in ms {
                let h = fields::cauchy_transform(m);
                acc.record((|| {
                    let c = analysis::estimate_capacity_1d(&h, analysis::DEFAULT_CAPACITY_WINDOW)?
                        .value;
                    let r = analysis::check_pointwise_1d(&h, c, &grid)?;
                    Ok(if r.verdict == Verdict::Consistent {
                        0.0
                    } else {
                        1.0
                    })
                })());
            }
        }
    }
    acc.finish()
}

fn pushforward_norm_invariance(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("pushforward_norm_invariance", Suite::Classes, 1e-10);
    par_samples(&mut acc, ctx, 303, 500, |rng| {
        let (field, n) = match rand::Rng::gen_range(rng, 0..3u8) {
            0 => (VectorField::Example1, 2),
            1 => (VectorField::Example2, 2),
            _ => (VectorField::Reciprocal1D, 1),
        };
        let z = metric_sample_any(rng, n)?;
        let h = field.eval(z.coords())?;
        let siegel = if n == 1 {
            h[0].norm() / z.head().im
        } else {
            ctx.norm(&z, &h)?
        };
        let w = domain::cayley_to_ball(&z)?;
        let g = BallPushforward(&field).eval(w.coords())?;
        Ok(rel(ball_norm_closed_form(w.coords(), &g), siegel))
    });
    acc.finish()
}

fn metric_sample_any(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Result<DomainPoint> {
    sampling::siegel_point(rng, n, 1.0, (1e-2, 1e2))
}

fn slice_capacity_group(
    name: &'static str,
    field: VectorField,
    cases: &[(C64, f64)],
) -> GroupReport {
    let mut acc = Acc::new(name, Suite::Classes, 1e-5);
    let window = CapacityWindow {
        y_min: 1.0,
        y_max: 1e6,
        count: 64,
    };
    for &(gamma, expected) in cases {
        acc.record((|| {
            let s = SliceField::new(&field, GeodesicParam::new(vec![gamma]))?;
            Ok(rel(
                analysis::estimate_capacity_1d(&s, window)?.value,
                expected,
            ))
        })());
    }
    acc.finish()
}

fn example1_slice_capacity(_: &Ctx) -> GroupReport {
    slice_capacity_group(
        "example1_slice_capacity",
        VectorField::Example1,
        &[(C64::new(1.0, 0.0), 2.0), (C64::new(2.0, 0.0), 8.0)],
    )
}

fn example2_slice_capacity(_: &Ctx) -> GroupReport {
    slice_capacity_group(
        "example2_slice_capacity",
        VectorField::Example2,
        &[
            (C64::new(0.0, 0.0), 1.0),
            (C64::new(1.0, 0.0), 1.0),
            (C64::new(1.0, 1.0), 1.0),
        ],
    )
}

fn example2_global_membership(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new(
        "example2_global_membership",
        Suite::Classes,
        analysis::RELATIVE_SLACK,
    );
    acc.record((|| {
        let r =
            analysis::membership_siegel(&VectorField::Example2, 2.0, &analysis::siegel_grid(2)?)?;
        // Excess of sup u⁴‖H‖² over c² = 4.
        Ok((r.sup * r.sup / 4.0 - 1.0).max(0.0))
    })());
    acc.finish()
}

fn example1_global_violation(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("example1_global_violation", Suite::Classes, 0.0);
    acc.record((|| {
        let r =
            analysis::membership_siegel(&VectorField::Example1, 7.0, &analysis::siegel_grid(2)?)?;
        let ok = r.verdict == Verdict::Violated && vec_norm(&r.witness[1..]) >= 2.0;
        Ok(if ok { 0.0 } else { 1.0 })
    })());
    acc.finish()
}

fn membership_cayley_agreement(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("membership_cayley_agreement", Suite::Classes, 0.0);
    let Ok(grid) = analysis::siegel_coarse_grid(2) else {
        acc.check(false);
        return acc.finish();
    };
    for (field, c) in [
        (VectorField::Example2, 2.0),
        (VectorField::Example1, 7.0),
        (VectorField::Zero(2), 0.0),
    ] {
        acc.record((|| {
            let a = analysis::membership_siegel(&field, c, &grid)?;
            let b = analysis::membership_ball_pushforward(&field, c, &grid)?;
            Ok(if a.verdict == b.verdict { 0.0 } else { 1.0 })
        })());
    }
    acc.finish()
}

fn slices_inherit_global_bound(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("slices_inherit_global_bound", Suite::Classes, 0.0);
    let grid = analysis::half_plane_grid();
    let gammas: Vec<GeodesicParam> = [
        C64::new(0.0, 0.0),
        C64::new(0.5, 0.0),
        C64::new(1.0, 1.0),
        C64::new(-3.0, 0.5),
    ]
    .iter()
    .map(|g| GeodesicParam::new(vec![*g]))
    .collect();
    acc.record((|| {
        let global = analysis::membership_siegel(
            &VectorField::Example2,
            2.0,
            &analysis::siegel_coarse_grid(2)?,
        )?;
        if global.verdict != Verdict::Consistent {
            return Ok(1.0);
        }
        let window = CapacityWindow {
            y_min: 1.0,
            y_max: 1e6,
            count: 32,
        };
        let reports =
            analysis::slice_membership(&VectorField::Example2, &gammas, 2.0, &grid, window)?;
        Ok(reports
            .iter()
            .filter(|r| r.pointwise.verdict != Verdict::Consistent)
            .count() as f64)
    })());
    acc.finish()
}

fn berkson_porta_fixtures(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("berkson_porta_fixtures", Suite::Classes, 1e-15);
    let cases = [
        (
            C64::new(0.0, 0.0),
            "1",
            C64::new(0.5, 0.0),
            C64::new(-0.5, 0.0),
        ),
        (
            C64::new(1.0, 0.0),
            "1",
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ),
        (
            C64::new(0.0, 0.0),
            "1 + z",
            C64::new(0.5, 0.0),
            C64::new(-0.75, 0.0),
        ),
    ];
    for (tau, p, at, expected) in cases {
        acc.record((|| {
            let g = fields::berkson_porta(tau, fields::parse_field(p, 1)?)?;
            Ok((g.eval(&[at])?[0] - expected).norm())
        })());
    }
    acc.record(Ok(
        match fields::berkson_porta(
            C64::new(0.0, 0.0),
            VectorField::Expr(vec![expr::constant(C64::new(-1.0, 0.0))]),
        ) {
            Err(Error::HalfPlaneCondition { .. }) => 0.0,
            _ => 1.0,
        },
    ));
    acc.finish()
}

// ---- flows ----

const FLOW_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn closed_form_endpoints(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("closed_form_endpoints", Suite::Flows, 1e-8);
    acc.record((|| {
        let g = fields::parse_field("-z", 1)?;
        let end = flows::flow_endpoint(&g, &DomainPoint::disc(c(0.5, 0.0))?, 1.0, FLOW_TOL)?;
        Ok((end.head() - c(0.5 * (-1f64).exp(), 0.0)).norm())
    })());
    acc.record((|| {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)])?;
        let end = flows::flow_endpoint(&VectorField::Example1, &z0, 1.0, FLOW_TOL)?;
        let exact = [I, (-I * 1.0 / I).exp() * 0.5];
        Ok(vec_dist(end.coords(), &exact))
    })());
    acc.record((|| {
        let end = flows::flow_endpoint(
            &VectorField::Reciprocal1D,
            &DomainPoint::half_plane(I)?,
            1.0,
            FLOW_TOL,
        )?;
        Ok((end.head() - c(0.0, 3f64.sqrt())).norm())
    })());
    acc.finish()
}

fn integrator_order(_: &Ctx) -> GroupReport {
    // Fixed-step convergence slope on y' = −y from 1/2; the observed slope
    // must lie within 20% of five.
    let mut acc = Acc::new("integrator_order", Suite::Flows, 0.2);
    acc.record((|| {
        let exact = c(0.5 * (-1f64).exp(), 0.0);
        let errs = [4usize, 8, 16]
            .iter()
            .map(|&n| {
                let y = integrator::solve_fixed(
                    |_, y| Ok(vec![-y[0]]),
                    vec![c(0.5, 0.0)],
                    0.0,
                    1.0,
                    n,
                )?;
                Ok((y[0] - exact).norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        let worst = errs
            .windows(2)
            .map(|w| ((w[0] / w[1]).log2() - 5.0).abs() / 5.0)
            .fold(0.0, f64::max);
        Ok(worst)
    })());
    acc.finish()
}

fn semigroup_law(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("semigroup_law", Suite::Flows, 1e-9);
    let cases: Vec<(VectorField, Result<DomainPoint>)> = vec![
        (
            VectorField::Example1,
            DomainPoint::siegel(vec![I, c(0.5, 0.0)]),
        ),
        (
            VectorField::Example2,
            DomainPoint::siegel(vec![I, c(0.5, 0.0)]),
        ),
        (VectorField::Reciprocal1D, DomainPoint::half_plane(I)),
    ];
    for (field, z0) in cases {
        acc.record((|| {
            let r = flows::semigroup_check(&field, &z0?, 0.5, 0.5, FLOW_TOL)?;
            Ok(if r.holds { r.residual } else { f64::INFINITY })
        })());
    }
    acc.record((|| {
        let g = fields::parse_field("-z", 1)?;
        Ok(
            flows::semigroup_check(&g, &DomainPoint::disc(c(0.3, 0.0))?, 1.0, 2.0, FLOW_TOL)?
                .residual,
        )
    })());
    acc.finish()
}

fn julia_monotonicity(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("julia_monotonicity", Suite::Flows, 0.0);
    let cases: Vec<(Arc<dyn Field>, Result<DomainPoint>)> = vec![
        (
            Arc::new(VectorField::Example1),
            DomainPoint::siegel(vec![I, c(0.5, 0.0)]),
        ),
        (
            Arc::new(VectorField::Example2),
            DomainPoint::siegel(vec![c(0.0, 2.0), c(0.0, 0.0)]),
        ),
        (
            Arc::new(VectorField::Example2),
            DomainPoint::siegel(vec![I, c(0.5, 0.0)]),
        ),
        (
            Arc::new(VectorField::Example2),
            DomainPoint::siegel(vec![c(-1.0, 0.3), c(0.2, -0.3)]),
        ),
        (
            Arc::new(VectorField::Reciprocal1D),
            DomainPoint::half_plane(c(0.5, 0.1)),
        ),
        (
            Arc::new(fields::cauchy_transform(
                fields::DiscreteMeasure::from_pairs(&[(-1.0, 0.5), (1.0, 0.5)])
                    .expect("valid measure"),
            )),
            DomainPoint::half_plane(c(0.2, 0.5)),
        ),
        (
            Arc::new(VectorField::Zero(2)),
            DomainPoint::siegel(vec![I, c(0.5, 0.0)]),
        ),
    ];
    for (field, z0) in cases {
        acc.record((|| {
            flows::julia_monotonicity(field.as_ref(), &z0?, 2.0, FLOW_TOL)?;
            Ok(0.0)
        })());
    }
    acc.finish()
}

fn displacement_bound(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("displacement_bound", Suite::Flows, 0.0);
    for z0 in [
        vec![c(0.0, 2.0), c(0.0, 0.0)],
        vec![c(0.0, 3.0), c(0.5, 0.0)],
    ] {
        for t in [0.5, 1.0] {
            acc.record((|| {
                let z0 = DomainPoint::siegel(z0.clone())?;
                let r =
                    flows::displacement_bound_check(&VectorField::Example2, 2.0, &z0, t, FLOW_TOL)?;
                Ok((r.lhs - r.rhs - r.slack).max(0.0))
            })());
        }
    }
    acc.finish()
}

fn example2_flow_map() -> Result<FlowMap> {
    FlowMap::new(Arc::new(VectorField::Example2), 1.0, FLOW_TOL)
}

fn horosphere_image_bound(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("horosphere_image_bound", Suite::Flows, 0.0);
    acc.record((|| {
        let samples = flows::pn_boundary_samples(2, 64)?;
        let r = flows::pn_horosphere_check(&example2_flow_map()?, 2.0, &samples)?;
        Ok((r.max_abs_u - r.bound).max(0.0))
    })());
    acc.finish()
}

fn pn_inequality_flow_map(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("pn_inequality_flow_map", Suite::Flows, analysis::PN_SLACK);
    acc.record((|| {
        let h = flows::DisplacementField::new(example2_flow_map()?, domain::Domain::Siegel(2));
        let r = analysis::check_pn_inequality(&h, &analysis::siegel_grid(2)?)?;
        Ok((-r.worst_margin).max(0.0))
    })());
    acc.finish()
}

fn loewner_fixtures(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("loewner_fixtures", Suite::Flows, 1e-8);
    let recip: Arc<dyn Field> = Arc::new(VectorField::Reciprocal1D);
    acc.record((|| {
        let hs = HerglotzField::new(vec![
            Piece {
                t0: 0.0,
                t1: 1.0,
                field: recip.clone(),
            },
            Piece {
                t0: 1.0,
                t1: 2.0,
                field: Arc::new(fields::parse_field("-2/z", 1)?),
            },
        ])?;
        let end = flows::integrate_loewner(&hs, &DomainPoint::half_plane(I)?, 2.0, FLOW_TOL)?;
        Ok((end.endpoint().head() - c(0.0, 7f64.sqrt())).norm())
    })());
    // Degenerate and split Herglotz fields must reproduce the autonomous flow.
    acc.record((|| {
        let z0 = DomainPoint::half_plane(c(0.3, 0.8))?;
        let auto = flows::integrate_autonomous(recip.as_ref(), &z0, 1.0, 1e-12)?;
        let single = flows::integrate_loewner(
            &HerglotzField::constant(recip.clone(), 1.0)?,
            &z0,
            1.0,
            1e-12,
        )?;
        let split = HerglotzField::new(vec![
            Piece {
                t0: 0.0,
                t1: 0.5,
                field: recip.clone(),
            },
            Piece {
                t0: 0.5,
                t1: 1.0,
                field: recip.clone(),
            },
        ])?;
        let split = flows::integrate_loewner(&split, &z0, 1.0, 1e-12)?;
        let a = (single.endpoint().head() - auto.endpoint().head()).norm();
        let b = (split.endpoint().head() - auto.endpoint().head()).norm();
        // Pinned tighter than the group tolerance.
        Ok(if a.max(b) < 1e-12 {
            a.max(b)
        } else {
            f64::INFINITY
        })
    })());
    acc.finish()
}

fn capacity_along_flows(ctx: &Ctx) -> GroupReport {
    let mut acc = Acc::new("capacity_along_flows", Suite::Flows, 1e-3);
    match seeded_measures(ctx) {
        Err(e) => acc.record(Err(e)),
        Ok(ms) => {
            let jobs: Vec<(fields::DiscreteMeasure, f64)> = ms
                .iter()
                .flat_map(|m| [0.5, 1.0, 2.0].map(|t| (m.clone(), t)))
                .collect();
            let results: Vec<Result<f64>> = jobs
                .par_iter()
                .map(|(m, t)| {
                    let f = FlowMap::new(Arc::new(fields::cauchy_transform(m.clone())), *t, 1e-12)?;
                    Ok((flows::extract_capacity(f)?.value - t * m.total_mass()).abs())
                })
                .collect();
            for r in results {
                acc.record(r);
            }
        }
    }
    acc.finish()
}

fn capacity_additivity(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new(
        "capacity_additivity",
        Suite::Flows,
        analysis::ADDITIVITY_TOLERANCE,
    );
    acc.record((|| {
        let f: Arc<dyn SelfMap> = Arc::new(flows::ExprMap::new(fields::parse_field(
            "sqrt(z^2 - 2)",
            1,
        )?));
        let l = flows::extract_capacity(f.clone())?.value;
        let composite = flows::extract_capacity(flows::Compose::of(f.clone(), f))?.value;
        Ok(
            analysis::capacity_additivity_check(&[l, l], composite, analysis::ADDITIVITY_TOLERANCE)
                .difference,
        )
    })());
    acc.finish()
}

fn denjoy_wolff_iteration(_: &Ctx) -> GroupReport {
    let mut acc = Acc::new("denjoy_wolff_iteration", Suite::Flows, 0.0);
    acc.record((|| {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)])?;
        let r = flows::iterate_map(
            &example2_flow_map()?,
            &z0,
            10_000,
            flows::DIVERGENCE_THRESHOLD,
        )?;
        let ok = r.diagnostic == flows::DwDiagnostic::DivergesToInfinity && r.abs_u[10_000] > 100.0;
        Ok(if ok { 0.0 } else { 1.0 })
    })());
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::All,
            Suite::Metric,
            Suite::Geodesics,
            Suite::Classes,
            Suite::Flows,
        ] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn ball_closed_form_is_disc_metric_in_dimension_one() {
        let w = [C64::new(0.3, -0.4)];
        let v = [C64::new(1.0, 2.0)];
        let expected = 2.0 * v[0].norm() / (1.0 - w[0].norm_sqr());
        assert!((ball_norm_closed_form(&w, &v) - expected).abs() < 1e-14);
    }

    #[test]
    fn metric_suite_passes() {
        let r = run_suite(Suite::Metric, 7);
        assert!(r.passed, "{:#?}", r.failed_groups().collect::<Vec<_>>());
        assert!(r.groups.len() >= 4);
    }

    #[test]
    fn geodesic_suite_passes() {
        let r = run_suite(Suite::Geodesics, 11);
        assert!(r.passed, "{:#?}", r.failed_groups().collect::<Vec<_>>());
    }
}
