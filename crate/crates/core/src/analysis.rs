//! Capacity estimation and sampled class-membership checks.
//!
//! Every check here evaluates an inequality on a fixed, versioned grid and
//! reports the worst case. A `consistent` verdict only says that no sampled
//! point violates the inequality; it is evidence for membership, not a proof.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{self, conj_dot, hyperbolic_norm_at, norm_sq, poisson, DomainPoint};
use crate::fields::{BallPushforward, Field};
use crate::geodesics::{GeodesicParam, SliceField};
use crate::{Error, Result, C64, I};

/// Relative slack on all "≤ c" comparisons.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Tolerated negative imaginary part of a half-plane field value.
pub const IM_SLACK: f64 = 1e-12;
/// Slack in the ‖H̃‖² ≤ |H₁ − 2iz̄̃ᵀH̃| check.
pub const PN_SLACK: f64 = 1e-10;

pub const NOT_A_PROOF: &str =
    "sampled necessary-condition check on a fixed grid; consistent is evidence, not proof";

/// Identifier of the default half-plane grid.
pub const HALF_PLANE_GRID_ID: &str = "hp-v1";
/// x ∈ {0} ∪ ±10^[−2, 2] with this many values per sign.
pub const HALF_PLANE_GRID_X_PER_SIDE: usize = 32;
pub const HALF_PLANE_GRID_X_DECADES: (f64, f64) = (-2.0, 2.0);
/// y ∈ 10^[−2, 4] with this many values.
pub const HALF_PLANE_GRID_Y_COUNT: usize = 64;
pub const HALF_PLANE_GRID_Y_DECADES: (f64, f64) = (-2.0, 4.0);

pub const SIEGEL_GRID_ID: &str = "siegel-v1";
pub const SIEGEL_COARSE_GRID_ID: &str = "siegel-coarse-v1";
/// ‖z̃‖ = ρ·√(Im z₁) for these ρ, plus z̃ = 0.
pub const SIEGEL_GRID_RADII: [f64; 4] = [0.25, 0.5, 0.75, 0.95];
/// Number of equally spaced phases for z̃.
pub const SIEGEL_GRID_PHASES: usize = 4;
pub const SIEGEL_COARSE_RADII: [f64; 2] = [0.5, 0.95];

/// Default capacity window: y from 1 to 10⁸, 64 geometric samples.
pub const DEFAULT_CAPACITY_WINDOW: CapacityWindow = CapacityWindow {
    y_min: 1.0,
    y_max: 1e8,
    count: 64,
};

/// `count` values 10^a … 10^b, geometrically spaced.
pub fn logspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(a)];
    }
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneGrid {
    pub id: String,
    pub points: Vec<C64>,
}

fn half_plane_rectangle(x_per_side: usize, y_count: usize) -> Vec<C64> {
    let (xa, xb) = HALF_PLANE_GRID_X_DECADES;
    let (ya, yb) = HALF_PLANE_GRID_Y_DECADES;
    let pos = logspace(xa, xb, x_per_side);
    let mut xs: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    xs.push(0.0);
    xs.extend(pos);
    let ys = logspace(ya, yb, y_count);
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| C64::new(x, y)))
        .collect()
}

/// The default half-plane grid `hp-v1` (65 × 64 points).
pub fn half_plane_grid() -> HalfPlaneGrid {
    HalfPlaneGrid {
        id: HALF_PLANE_GRID_ID.into(),
        points: half_plane_rectangle(HALF_PLANE_GRID_X_PER_SIDE, HALF_PLANE_GRID_Y_COUNT),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiegelGrid {
    pub id: String,
    pub n: usize,
    pub points: Vec<DomainPoint>,
}

/// Unit directions for z̃: the basis vectors and, for n ≥ 3, the normalized
/// all-ones vector.
fn tail_directions(m: usize) -> Vec<Vec<C64>> {
    let mut dirs: Vec<Vec<C64>> = (0..m)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); m];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    if m >= 2 {
        dirs.push(vec![C64::new(1.0 / (m as f64).sqrt(), 0.0); m]);
    }
    dirs
}

fn siegel_points(n: usize, z1s: &[C64], radii: &[f64]) -> Result<Vec<DomainPoint>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    let dirs = tail_directions(n - 1);
    let mut points = Vec::new();
    for &z1 in z1s {
        let mut z = vec![C64::new(0.0, 0.0); n];
        z[0] = z1;
        points.push(DomainPoint::siegel(z.clone())?);
        if n == 1 {
            continue;
        }
        let scale = z1.im.sqrt();
        for &rho in radii {
            for p in 0..SIEGEL_GRID_PHASES {
                let phase = C64::from_polar(
                    rho * scale,
                    2.0 * std::f64::consts::PI * p as f64 / SIEGEL_GRID_PHASES as f64,
                );
                for d in &dirs {
                    for k in 1..n {
                        z[k] = phase * d[k - 1];
                    }
                    points.push(DomainPoint::siegel(z.clone())?);
                }
            }
        }
    }
    Ok(points)
}

/// The default Siegel grid `siegel-v1`: z₁ over `hp-v1`, z̃ over circles of
/// radius ρ√(Im z₁) in each grid direction.
pub fn siegel_grid(n: usize) -> Result<SiegelGrid> {
    Ok(SiegelGrid {
        id: SIEGEL_GRID_ID.into(),
        n,
        points: siegel_points(n, &half_plane_grid().points, &SIEGEL_GRID_RADII)?,
    })
}

/// A smaller grid `siegel-coarse-v1` (17 × 16 z₁ values, two radii).
pub fn siegel_coarse_grid(n: usize) -> Result<SiegelGrid> {
    Ok(SiegelGrid {
        id: SIEGEL_COARSE_GRID_ID.into(),
        n,
        points: siegel_points(n, &half_plane_rectangle(8, 16), &SIEGEL_COARSE_RADII)?,
    })
}

/// Grid by identifier (`default` is `siegel-v1`).
pub fn siegel_grid_by_id(id: &str, n: usize) -> Result<SiegelGrid> {
    match id {
        "default" | SIEGEL_GRID_ID => siegel_grid(n),
        SIEGEL_COARSE_GRID_ID | "coarse" => siegel_coarse_grid(n),
        other => Err(Error::InvalidArgument(format!(
            "unknown grid `{other}` (expected {SIEGEL_GRID_ID} or {SIEGEL_COARSE_GRID_ID})"
        ))),
    }
}

/// Parallel evaluation with a deterministic argmax (lowest index wins ties;
/// NaN counts as larger than any number). Errors are reported in index order.
fn sweep_max<T, F>(items: &[T], f: F) -> Result<(usize, f64)>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync,
{
    let values: Vec<Result<f64>> = items.par_iter().map(&f).collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        let better = match best {
            None => true,
            Some((_, b)) => (v > b) || (v.is_nan() && !b.is_nan()),
        };
        if better {
            best = Some((k, v));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty grid".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
}

impl Verdict {
    fn from_bound(sup: f64, c: f64) -> Verdict {
        if sup <= c * (1.0 + RELATIVE_SLACK) {
            Verdict::Consistent
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub c: f64,
    /// Largest sampled value of the normalized quantity (Im z·|H| in one
    /// dimension, u²·‖H‖ in the Siegel domain).
    pub sup: f64,
    #[serde(with = "crate::serial::complex_vec")]
    pub witness: Vec<C64>,
    pub verdict: Verdict,
    /// Smallest sampled Im H(z); only for half-plane checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_im: Option<f64>,
    pub grid: String,
    pub points: usize,
    pub note: &'static str,
}

/// Pointwise check |H(z)| ≤ c/Im z and Im H(z) ≥ 0 on a half-plane grid.
pub fn check_pointwise_1d<F: Field + ?Sized>(
    h: &F,
    c: f64,
    grid: &HalfPlaneGrid,
) -> Result<MembershipReport> {
    if h.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: h.dim(),
        });
    }
    let values: Vec<Result<C64>> = grid
        .points
        .par_iter()
        .map(|z| Ok(h.eval(&[*z])?[0]))
        .collect();
    let values: Vec<C64> = values.into_iter().collect::<Result<_>>()?;
    let (k, sup) = sweep_max(
        &grid.points.iter().zip(&values).collect::<Vec<_>>(),
        |(z, v)| Ok(z.im * v.norm()),
    )?;
    let min_im = values.iter().map(|v| v.im).fold(f64::INFINITY, f64::min);
    let mut verdict = Verdict::from_bound(sup, c);
    if min_im < -IM_SLACK {
        verdict = Verdict::Violated;
    }
    Ok(MembershipReport {
        c,
        sup,
        witness: vec![grid.points[k]],
        verdict,
        min_im: Some(min_im),
        grid: grid.id.clone(),
        points: grid.points.len(),
        note: NOT_A_PROOF,
    })
}

/// u(z)²·‖H(z)‖ at a Siegel point.
pub fn normalized_norm<F: Field + ?Sized>(h: &F, z: &DomainPoint) -> Result<f64> {
    let v = crate::fields::eval_field(h, z)?;
    let u = poisson(z).value();
    Ok(u * u * hyperbolic_norm_at(z, &v)?)
}

/// Sampled check of ‖H(z)‖ ≤ c/u(z)² on a Siegel grid.
pub fn membership_siegel<F: Field + ?Sized>(
    h: &F,
    c: f64,
    grid: &SiegelGrid,
) -> Result<MembershipReport> {
    if h.dim() != grid.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            found: h.dim(),
        });
    }
    let (k, sup) = sweep_max(&grid.points, |z| normalized_norm(h, z))?;
    Ok(MembershipReport {
        c,
        sup,
        witness: grid.points[k].coords().to_vec(),
        verdict: Verdict::from_bound(sup, c),
        min_im: None,
        grid: grid.id.clone(),
        points: grid.points.len(),
        note: NOT_A_PROOF,
    })
}

/// Ball-side check ‖G(w)‖ ≤ c/u(w)² for a field in ball coordinates, sampled
/// at the Cayley images of the Siegel grid. The witness is a ball point.
pub fn membership_ball<F: Field + ?Sized>(
    g: &F,
    c: f64,
    grid: &SiegelGrid,
) -> Result<MembershipReport> {
    let ball: Vec<DomainPoint> = grid
        .points
        .par_iter()
        .map(domain::cayley_to_ball)
        .collect::<Result<_>>()?;
    let (k, sup) = sweep_max(&ball, |w| normalized_norm(g, w))?;
    Ok(MembershipReport {
        c,
        sup,
        witness: ball[k].coords().to_vec(),
        verdict: Verdict::from_bound(sup, c),
        min_im: None,
        grid: format!("cayley({})", grid.id),
        points: ball.len(),
        note: NOT_A_PROOF,
    })
}

/// [`membership_ball`] applied to the pushforward of a Siegel-side field.
pub fn membership_ball_pushforward<F: Field>(
    h: F,
    c: f64,
    grid: &SiegelGrid,
) -> Result<MembershipReport> {
    membership_ball(&BallPushforward(h), c, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityWindow {
    pub y_min: f64,
    pub y_max: f64,
    pub count: usize,
}

impl CapacityWindow {
    pub fn new(y_min: f64, y_max: f64, count: usize) -> Result<Self> {
        if !(y_min > 0.0 && y_max > y_min && y_max.is_finite() && count >= 4) {
            return Err(Error::InvalidArgument(format!(
                "capacity window needs 0 < y_min < y_max and at least 4 samples (got {y_min}, {y_max}, {count})"
            )));
        }
        Ok(Self {
            y_min,
            y_max,
            count,
        })
    }

    pub fn ys(&self) -> Vec<f64> {
        logspace(self.y_min.log10(), self.y_max.log10(), self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Converged,
    Increasing,
    Inconclusive,
}

/// Relative spread below which the tail counts as converged.
pub const CONVERGED_SPREAD: f64 = 1e-4;
/// Growth across a monotone tail above which it counts as increasing.
pub const INCREASING_GROWTH: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Tail maximum of y·|H(iy)|.
    pub value: f64,
    /// (y, y·|H(iy)|) pairs, y increasing.
    pub samples: Vec<(f64, f64)>,
    pub trend: Trend,
    pub window: CapacityWindow,
}

impl CapacityEstimate {
    /// The samples the value and trend are computed from.
    pub fn tail(&self) -> &[(f64, f64)] {
        &self.samples[tail_start(self.samples.len())..]
    }
}

fn tail_start(len: usize) -> usize {
    len - (len / 4).max(2)
}

fn classify(tail: &[f64]) -> Trend {
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || (max - min) <= CONVERGED_SPREAD * max {
        return Trend::Converged;
    }
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
    let first = tail[0];
    let last = tail[tail.len() - 1];
    if monotone && last > first * (1.0 + INCREASING_GROWTH) {
        Trend::Increasing
    } else {
        Trend::Inconclusive
    }
}

/// Tail-maximum estimate of l(H) = limsup_{y→∞} y·|H(iy)|.
pub fn estimate_capacity_1d<F: Field + ?Sized>(
    h: &F,
    window: CapacityWindow,
) -> Result<CapacityEstimate> {
    if h.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: h.dim(),
        });
    }
    let window = CapacityWindow::new(window.y_min, window.y_max, window.count)?;
    let samples = window
        .ys()
        .into_iter()
        .map(|y| Ok((y, y * h.eval(&[I * y])?[0].norm())))
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<f64> = samples[tail_start(samples.len())..]
        .iter()
        .map(|s| s.1)
        .collect();
    let value = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(CapacityEstimate {
        value,
        samples,
        trend: classify(&tail),
        window,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub gamma: GeodesicParam,
    pub pointwise: MembershipReport,
    pub capacity: CapacityEstimate,
}

/// Pointwise check and capacity estimate of each slice h_γ.
pub fn slice_membership<F: Field + ?Sized>(
    h: &F,
    gammas: &[GeodesicParam],
    c: f64,
    grid: &HalfPlaneGrid,
    window: CapacityWindow,
) -> Result<Vec<SliceReport>> {
    gammas
        .iter()
        .map(|g| {
            let slice = SliceField::new(h, g.clone())?;
            Ok(SliceReport {
                gamma: g.clone(),
                pointwise: check_pointwise_1d(&slice, c, grid)?,
                capacity: estimate_capacity_1d(&slice, window)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnReport {
    /// min over the grid of (|H₁ − 2iz̄̃ᵀH̃| − ‖H̃‖²)/max(1, |H₁ − 2iz̄̃ᵀH̃|).
    pub worst_margin: f64,
    #[serde(with = "crate::serial::complex_vec")]
    pub witness: Vec<C64>,
    pub holds: bool,
    pub slack: f64,
    pub grid: String,
    pub points: usize,
}

/// Relative margin of ‖H̃‖² ≤ |H₁ − 2iz̄̃ᵀH̃| at z.
pub fn pn_margin(z: &DomainPoint, h: &[C64]) -> f64 {
    let rhs = (h[0] - 2.0 * I * conj_dot(z.tail(), &h[1..])).norm();
    let lhs = norm_sq(&h[1..]);
    (rhs - lhs) / rhs.max(1.0)
}

/// Sampled check of ‖H̃(z)‖² ≤ |H₁(z) − 2iz̄̃ᵀH̃(z)|, the inequality satisfied
/// by H = f − id for horosphere-preserving self-maps f.
pub fn check_pn_inequality<F: Field + ?Sized>(h: &F, grid: &SiegelGrid) -> Result<PnReport> {
    if h.dim() != grid.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            found: h.dim(),
        });
    }
    let (k, neg) = sweep_max(&grid.points, |z| {
        let v = crate::fields::eval_field(h, z)?;
        Ok(-pn_margin(z, &v))
    })?;
    let worst = -neg;
    Ok(PnReport {
        worst_margin: worst,
        witness: grid.points[k].coords().to_vec(),
        holds: worst >= -PN_SLACK,
        slack: PN_SLACK,
        grid: grid.id.clone(),
        points: grid.points.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub sum: f64,
    pub composite: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Default tolerance for [`capacity_additivity_check`].
pub const ADDITIVITY_TOLERANCE: f64 = 1e-3;

/// Compare l(f₁) + … + l(f_k) with l(f₁ ∘ … ∘ f_k).
pub fn capacity_additivity_check(
    individual: &[f64],
    composite: f64,
    tolerance: f64,
) -> AdditivityReport {
    let sum: f64 = individual.iter().sum();
    let difference = (sum - composite).abs();
    AdditivityReport {
        sum,
        composite,
        difference,
        tolerance,
        holds: difference < tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{parse_field, VectorField};

    fn window(y_max: f64) -> CapacityWindow {
        CapacityWindow::new(1.0, y_max, 64).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let g = half_plane_grid();
        assert_eq!(g.points.len(), 65 * 64);
        assert!(g.points.iter().any(|z| z.re == 0.0 && z.im == 1e4));
        let s = siegel_grid(2).unwrap();
        assert_eq!(s.points.len(), 65 * 64 * 17);
        let s = siegel_grid(3).unwrap();
        assert_eq!(s.points.len(), 65 * 64 * (1 + 16 * 3));
        assert_eq!(siegel_grid(1).unwrap().points.len(), 65 * 64);
    }

    #[test]
    fn reciprocal_capacity_is_one() {
        let est =
            estimate_capacity_1d(&VectorField::Reciprocal1D, DEFAULT_CAPACITY_WINDOW).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.trend, Trend::Converged);
        assert!(est.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn example1_slice_capacity() {
        let g = GeodesicParam::new(vec![C64::new(1.0, 0.0)]);
        let s = SliceField::new(VectorField::Example1, g).unwrap();
        let est = estimate_capacity_1d(&s, window(1e6)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn trend_classifier() {
        let h = parse_field("-z", 1).unwrap();
        assert_eq!(
            estimate_capacity_1d(&h, window(1e4)).unwrap().trend,
            Trend::Increasing
        );
        let h = parse_field("-exp(i*z)/z - 1/z", 1).unwrap();
        let est = estimate_capacity_1d(&h, window(1e4)).unwrap();
        assert_eq!(est.trend, Trend::Converged);
        let h = parse_field("-(2 + sqrt(z))/z", 1).unwrap();
        let est = estimate_capacity_1d(&h, window(1e2)).unwrap();
        assert_eq!(est.trend, Trend::Increasing);
        assert!(CapacityWindow::new(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let grid = half_plane_grid();
        let r = check_pointwise_1d(&VectorField::Reciprocal1D, 1.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!((r.sup - 1.0).abs() < 1e-15);
        let h = parse_field("-2/z", 1).unwrap();
        let r = check_pointwise_1d(&h, 1.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witness[0].re, 0.0);
        let r = check_pointwise_1d(&VectorField::Zero(1), 0.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        let h = parse_field("1/z", 1).unwrap();
        let r = check_pointwise_1d(&h, 10.0, &grid).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Violated,
            "maps into the lower half-plane"
        );
    }

    #[test]
    fn siegel_membership_examples() {
        let grid = siegel_coarse_grid(2).unwrap();
        let r = membership_siegel(&VectorField::Example2, 2.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        let r = membership_siegel(&VectorField::Example1, 100.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let r = membership_siegel(&VectorField::Zero(2), 0.0, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!(r.sup, 0.0);
    }

    #[test]
    fn ball_side_agrees_with_siegel_side() {
        let grid = siegel_coarse_grid(2).unwrap();
        let a = membership_siegel(&VectorField::Example2, 2.0, &grid).unwrap();
        let b = membership_ball_pushforward(VectorField::Example2, 2.0, &grid).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert!((a.sup - b.sup).abs() < 1e-6 * a.sup);
    }

    #[test]
    fn pn_examples() {
        let grid = siegel_coarse_grid(2).unwrap();
        let r = check_pn_inequality(&VectorField::Zero(2), &grid).unwrap();
        assert!(r.holds);
        assert_eq!(r.worst_margin, 0.0);
        let h = parse_field("0; 1", 2).unwrap();
        let r = check_pn_inequality(&h, &grid).unwrap();
        assert!(!r.holds);
        let z = DomainPoint::siegel(vec![I, C64::new(0.0, 0.0)]).unwrap();
        assert_eq!(
            pn_margin(&z, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            -1.0
        );
    }

    #[test]
    fn additivity() {
        assert!(capacity_additivity_check(&[1.0, 1.0], 2.0, ADDITIVITY_TOLERANCE).holds);
        assert!(!capacity_additivity_check(&[1.0, 1.0], 2.1, ADDITIVITY_TOLERANCE).holds);
        assert!(capacity_additivity_check(&[0.0, 0.7], 0.7, ADDITIVITY_TOLERANCE).holds);
    }
}
