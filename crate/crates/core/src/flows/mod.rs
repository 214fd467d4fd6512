//! Semigroup and Loewner flows.
//!
//! [`integrate_autonomous`] solves dw/dt = G(w), w(0) = z₀ inside the domain
//! of z₀; [`integrate_loewner`] solves the non-autonomous equation for a
//! field that is piecewise constant in time, restarting the integrator at
//! every piece boundary. Steps whose stages would leave the domain are
//! rejected and halved, so every recorded point is interior.

pub mod checks;
pub mod integrator;
pub mod maps;

use std::io::Write;
use std::sync::Arc;

use crate::domain::{poisson, Domain, DomainPoint};
use crate::fields::Field;
use crate::{Error, Result, C64};

pub use checks::*;
pub use integrator::Options;
pub use maps::*;

/// Default local error tolerance per unit time.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<DomainPoint>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub max_local_error: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &DomainPoint {
        self.points.last().expect("trajectories are never empty")
    }

    pub fn domain(&self) -> Domain {
        self.points[0].domain()
    }

    /// |u| along the trajectory.
    pub fn abs_u(&self) -> Vec<f64> {
        self.points.iter().map(|p| poisson(p).abs()).collect()
    }

    /// CSV with header `t,re(z1),im(z1),…,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.points[0].dim();
        let mut header = vec!["t".to_string()];
        for k in 1..=n {
            header.push(format!("re(z{k})"));
            header.push(format!("im(z{k})"));
        }
        header.push("u".into());
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![format!("{t}")];
            for c in p.coords() {
                row.push(format!("{}", c.re));
                row.push(format!("{}", c.im));
            }
            row.push(format!("{}", poisson(p).value()));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    fn append(&mut self, other: Trajectory) {
        self.times.extend(other.times.into_iter().skip(1));
        self.points.extend(other.points.into_iter().skip(1));
        self.steps_accepted += other.steps_accepted;
        self.steps_rejected += other.steps_rejected;
        self.max_local_error = self.max_local_error.max(other.max_local_error);
    }
}

fn check_field_dim<F: Field + ?Sized>(g: &F, z0: &DomainPoint) -> Result<()> {
    if g.dim() == z0.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: z0.dim(),
            found: g.dim(),
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "flow time must be finite and nonnegative, got {t}"
        )))
    }
}

/// Run the integrator from `t0` to `t1`, recording either every accepted
/// step or, with `samples`, the dense-output values at those times.
fn run<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t0: f64,
    t1: f64,
    tol: f64,
    samples: Option<&[f64]>,
) -> Result<Trajectory> {
    check_field_dim(g, z0)?;
    let domain = z0.domain();
    let opts = Options::new(tol)?;
    let mut traj = Trajectory {
        times: vec![t0],
        points: vec![z0.clone()],
        steps_accepted: 0,
        steps_rejected: 0,
        max_local_error: 0.0,
    };
    let mut pending = samples.map(|s| s.iter().copied().filter(|&t| t > t0 && t <= t1).peekable());
    let (y, stats) = integrator::solve(
        |_, y| g.eval(y),
        |y| domain.contains(y),
        z0.coords().to_vec(),
        t0,
        t1,
        opts,
        |step| {
            match pending.as_mut() {
                None => {
                    traj.times.push(step.t1());
                    traj.points
                        .push(DomainPoint::new(domain, step.eval(step.t1()))?);
                }
                Some(queue) => {
                    while let Some(&t) = queue.peek() {
                        if t > step.t1() {
                            break;
                        }
                        traj.times.push(t);
                        traj.points.push(DomainPoint::new(domain, step.eval(t))?);
                        queue.next();
                    }
                }
            }
            Ok(())
        },
    )?;
    traj.steps_accepted = stats.accepted;
    traj.steps_rejected = stats.rejected;
    traj.max_local_error = stats.max_local_error;
    // The final recorded point is the integrator state itself, not an
    // interpolant, so endpoints are identical with and without sampling.
    let end = DomainPoint::new(domain, y)?;
    if traj.times.last() == Some(&t1) && traj.times.len() > 1 {
        *traj.points.last_mut().expect("nonempty") = end;
    } else if t1 > t0 {
        traj.times.push(t1);
        traj.points.push(end);
    }
    Ok(traj)
}

/// Solve dw/dt = G(w), w(0) = z₀ on [0, T], recording every accepted step.
pub fn integrate_autonomous<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<Trajectory> {
    check_time(t)?;
    run(g, z0, 0.0, t, tol, None)
}

/// As [`integrate_autonomous`], recording only the given (increasing)
/// sample times in (0, T] via dense output, plus the endpoint.
pub fn integrate_sampled<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    check_time(t)?;
    if sample_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "sample times must be increasing".into(),
        ));
    }
    run(g, z0, 0.0, t, tol, Some(sample_times))
}

/// Endpoint Φ_T(z₀) without recording the trajectory.
pub fn flow_endpoint<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<DomainPoint> {
    check_time(t)?;
    check_field_dim(g, z0)?;
    let domain = z0.domain();
    let (y, _) = integrator::solve(
        |_, y| g.eval(y),
        |y| domain.contains(y),
        z0.coords().to_vec(),
        0.0,
        t,
        Options::new(tol)?,
        |_| Ok(()),
    )?;
    DomainPoint::new(domain, y)
}

/// Φ_T(z₀) − z₀, integrated directly as D' = G(z₀ + D) so that small
/// displacements keep full relative accuracy.
pub fn flow_displacement<F: Field + ?Sized>(
    g: &F,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<Vec<C64>> {
    check_time(t)?;
    check_field_dim(g, z0)?;
    let domain = z0.domain();
    let base = z0.coords();
    let shift = |d: &[C64]| -> Vec<C64> { base.iter().zip(d).map(|(a, b)| a + b).collect() };
    let (d, _) = integrator::solve(
        |_, d| g.eval(&shift(d)),
        |d| domain.contains(&shift(d)),
        vec![C64::new(0.0, 0.0); z0.dim()],
        0.0,
        t,
        Options::new(tol)?,
        |_| Ok(()),
    )?;
    Ok(d)
}

/// One time interval of a piecewise-constant Herglotz field.
#[derive(Clone)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub field: Arc<dyn Field>,
}

impl std::fmt::Debug for Piece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Piece[{}, {}] (dim {})",
            self.t0,
            self.t1,
            self.field.dim()
        )
    }
}

/// Tolerance for matching piece endpoints.
pub const PIECE_JOIN_TOL: f64 = 1e-12;

/// A time-dependent field H(t, ·), constant on each of its pieces.
#[derive(Debug, Clone)]
pub struct HerglotzField {
    pieces: Vec<Piece>,
}

impl HerglotzField {
    /// Pieces must be sorted, start at 0 and join without gaps or overlaps.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidArgument(
                "a Herglotz field needs at least one piece".into(),
            ));
        };
        if first.t0.abs() > PIECE_JOIN_TOL {
            return Err(Error::CoverageGap {
                at: 0.0,
                end: first.t0,
            });
        }
        let n = first.field.dim();
        for p in &pieces {
            if !(p.t1 > p.t0) {
                return Err(Error::InvalidArgument(format!(
                    "piece [{}, {}] is empty",
                    p.t0, p.t1
                )));
            }
            if p.field.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.field.dim(),
                });
            }
        }
        for w in pieces.windows(2) {
            if w[1].t0 > w[0].t1 + PIECE_JOIN_TOL {
                return Err(Error::CoverageGap {
                    at: w[0].t1,
                    end: w[1].t0,
                });
            }
            if w[1].t0 < w[0].t1 - PIECE_JOIN_TOL {
                return Err(Error::InvalidArgument(format!(
                    "pieces [{}, {}] and [{}, {}] overlap",
                    w[0].t0, w[0].t1, w[1].t0, w[1].t1
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// A single piece on [0, T].
    pub fn constant(field: Arc<dyn Field>, t: f64) -> Result<Self> {
        Self::new(vec![Piece {
            t0: 0.0,
            t1: t,
            field,
        }])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].field.dim()
    }

    /// End of the covered interval.
    pub fn end(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.t1)
    }
}

/// Solve ∂Φ/∂t = H(t, Φ) on [0, T], restarting at piece boundaries.
pub fn integrate_loewner(
    hs: &HerglotzField,
    z0: &DomainPoint,
    t: f64,
    tol: f64,
) -> Result<Trajectory> {
    check_time(t)?;
    if hs.end() < t - PIECE_JOIN_TOL {
        return Err(Error::CoverageGap {
            at: hs.end(),
            end: t,
        });
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![z0.clone()],
        steps_accepted: 0,
        steps_rejected: 0,
        max_local_error: 0.0,
    };
    let mut start = 0.0;
    for piece in hs.pieces() {
        if start >= t {
            break;
        }
        let stop = if piece.t1 >= t - PIECE_JOIN_TOL {
            t
        } else {
            piece.t1
        };
        let part = run(
            piece.field.as_ref(),
            traj.endpoint(),
            start,
            stop,
            tol,
            None,
        )?;
        traj.append(part);
        start = stop;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{parse_field, VectorField};
    use crate::I;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disc_linear_flow() {
        let g = parse_field("-z", 1).unwrap();
        let z0 = DomainPoint::disc(c(0.5, 0.0)).unwrap();
        let tr = integrate_autonomous(&g, &z0, 1.0, 1e-10).unwrap();
        assert!((tr.endpoint().head() - c(0.5 * (-1f64).exp(), 0.0)).norm() < 1e-8);
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn example1_flow() {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
        let end = flow_endpoint(&VectorField::Example1, &z0, 1.0, 1e-10).unwrap();
        assert!((end.coords()[0] - I).norm() < 1e-12);
        assert!((end.coords()[1] - c(0.5 * (-1f64).exp(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn reciprocal_flow() {
        let z0 = DomainPoint::half_plane(I).unwrap();
        let end = flow_endpoint(&VectorField::Reciprocal1D, &z0, 1.0, 1e-10).unwrap();
        assert!((end.head() - c(0.0, 3f64.sqrt())).norm() < 1e-8);
    }

    #[test]
    fn sampled_and_unsampled_endpoints_agree() {
        let z0 = DomainPoint::half_plane(I).unwrap();
        let a = integrate_autonomous(&VectorField::Reciprocal1D, &z0, 1.0, 1e-10).unwrap();
        let b = integrate_sampled(
            &VectorField::Reciprocal1D,
            &z0,
            1.0,
            1e-10,
            &[0.25, 0.5, 0.75],
        )
        .unwrap();
        assert_eq!(a.endpoint(), b.endpoint());
        assert_eq!(b.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for (t, p) in b.times.iter().zip(&b.points) {
            let exact = c(0.0, (1.0 + 2.0 * t).sqrt());
            assert!((p.head() - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
        let tr = integrate_autonomous(&VectorField::Example2, &z0, 0.0, 1e-10).unwrap();
        assert_eq!(tr.points.len(), 1);
        assert_eq!(tr.endpoint(), &z0);
        assert!(integrate_autonomous(&VectorField::Example2, &z0, -1.0, 1e-10).is_err());
    }

    #[test]
    fn finite_time_exit_underflows() {
        // w' = 1/w leaves the half-plane through 0 at t = 1/2 from w = i.
        let g = parse_field("1/z", 1).unwrap();
        let z0 = DomainPoint::half_plane(I).unwrap();
        let r = integrate_autonomous(&g, &z0, 2.0, 1e-10);
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })), "{r:?}");
    }

    #[test]
    fn loewner_two_pieces() {
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
        let z0 = DomainPoint::half_plane(I).unwrap();
        let tr = integrate_loewner(&hs, &z0, 2.0, 1e-10).unwrap();
        assert!((tr.endpoint().head() - c(0.0, 7f64.sqrt())).norm() < 1e-8);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert!(tr.times.contains(&1.0));
    }

    #[test]
    fn loewner_coverage() {
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
        let late = HerglotzField::new(vec![Piece {
            t0: 0.5,
            t1: 1.0,
            field: f.clone(),
        }]);
        assert!(matches!(late, Err(Error::CoverageGap { .. })));
        let short = HerglotzField::constant(f, 1.0).unwrap();
        let z0 = DomainPoint::half_plane(I).unwrap();
        assert!(matches!(
            integrate_loewner(&short, &z0, 2.0, 1e-10),
            Err(Error::CoverageGap { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let z0 = DomainPoint::siegel(vec![I, c(0.5, 0.0)]).unwrap();
        let tr = integrate_sampled(&VectorField::Example1, &z0, 1.0, 1e-10, &[0.5]).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,re(z1),im(z1),re(z2),im(z2),u");
        assert_eq!(lines.next().unwrap(), "0,0,1,0.5,0,-0.75");
        assert_eq!(csv.lines().count(), 4);
    }
}
