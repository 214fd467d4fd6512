//! Dormand–Prince 5(4) with PI step control and dense output.
//!
//! The state is a vector of complex numbers; the error norm treats each
//! complex component as one entry, scaled by `tol·(1 + max|y|)`.

use crate::{Error, Result, C64};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [&[f64]; 7] = [
    &[],
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Consecutive rejections after which integration gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    /// Hard cap on the number of attempted steps.
    pub max_steps: usize,
}

impl Options {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self {
            tol,
            max_steps: 1_000_000,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest componentwise local error estimate of an accepted step.
    pub max_local_error: f64,
}

/// An accepted step with its continuous extension.
pub struct Step {
    pub t0: f64,
    pub h: f64,
    cont: [Vec<C64>; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> &[C64] {
        &self.cont[0]
    }

    /// Interpolated state at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> Vec<C64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.cont;
        (0..c0.len())
            .map(|i| c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i]))))
            .collect()
    }
}

fn axpy(y: &[C64], h: f64, coeffs: &[f64], k: &[Vec<C64>]) -> Vec<C64> {
    (0..y.len())
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    acc += a * k[j][i];
                }
            }
            y[i] + h * acc
        })
        .collect()
}

fn scaled_norm(v: &[C64], y0: &[C64], y1: &[C64], tol: f64) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = (0..v.len())
        .map(|i| {
            let sc = tol + tol * y0[i].norm().max(y1[i].norm());
            (v[i].norm() / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

enum Attempt {
    /// A stage or the result left the admissible set.
    Outside,
    Done {
        y1: Vec<C64>,
        k: Vec<Vec<C64>>,
        err: f64,
        err_max: f64,
    },
}

fn attempt<R, A>(
    rhs: &mut R,
    admissible: &A,
    t: f64,
    y: &[C64],
    k1: &[C64],
    h: f64,
    tol: f64,
) -> Result<Attempt>
where
    R: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
    A: Fn(&[C64]) -> bool,
{
    let mut k: Vec<Vec<C64>> = Vec::with_capacity(7);
    k.push(k1.to_vec());
    let mut y1 = Vec::new();
    for s in 1..7 {
        let ys = axpy(y, h, A[s], &k);
        if !admissible(&ys) {
            return Ok(Attempt::Outside);
        }
        k.push(rhs(t + C[s] * h, &ys)?);
        if s == 6 {
            y1 = ys;
        }
    }
    let e = axpy(&vec![C64::new(0.0, 0.0); y.len()], h, &E, &k);
    let err = scaled_norm(&e, y, &y1, tol);
    let err_max = e.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(Attempt::Done {
        y1,
        k,
        err,
        err_max,
    })
}

fn initial_step<R, A>(
    rhs: &mut R,
    admissible: &A,
    t: f64,
    y: &[C64],
    f0: &[C64],
    span: f64,
    tol: f64,
) -> Result<f64>
where
    R: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
    A: Fn(&[C64]) -> bool,
{
    let zero = vec![C64::new(0.0, 0.0); y.len()];
    let d0 = scaled_norm(y, y, &zero, tol);
    let d1 = scaled_norm(f0, y, &zero, tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let mut y1 = axpy(y, h0, &[1.0], &[f0.to_vec()]);
    let mut tries = 0;
    while !admissible(&y1) {
        h0 *= 0.5;
        tries += 1;
        if tries > MAX_CONSECUTIVE_REJECTIONS {
            return Err(Error::StepSizeUnderflow { t, h: h0 });
        }
        y1 = axpy(y, h0, &[1.0], &[f0.to_vec()]);
    }
    let f1 = rhs(t + h0, &y1)?;
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&diff, y, &zero, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrate y' = rhs(t, y) from `t0` to `t1 ≥ t0`, calling `on_step` for
/// every accepted step. States failing `admissible` are never evaluated or
/// accepted; a step that would produce one is retried at half the size.
pub fn solve<R, A, O>(
    mut rhs: R,
    admissible: A,
    y0: Vec<C64>,
    t0: f64,
    t1: f64,
    opts: Options,
    mut on_step: O,
) -> Result<(Vec<C64>, Stats)>
where
    R: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
    A: Fn(&[C64]) -> bool,
    O: FnMut(&Step) -> Result<()>,
{
    let mut stats = Stats::default();
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    if t1 == t0 {
        return Ok((y0, stats));
    }
    let tol = opts.tol;
    let expo1 = 0.2 - BETA * 0.75;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    let mut h = initial_step(&mut rhs, &admissible, t, &y, &k1, t1 - t0, tol)?;
    let mut facold: f64 = 1e-4;
    let mut streak = 0usize;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    while t < t1 {
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let mut last = false;
        if t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h <= 1e-15 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        match attempt(&mut rhs, &admissible, t, &y, &k1, h, tol)? {
            Attempt::Done {
                y1,
                k,
                err,
                err_max,
            } if err <= 1.0 => {
                let fac11 = err.powf(expo1);
                let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut hnew = h / fac;
                facold = err.max(1e-4);
                if last_rejected {
                    hnew = hnew.min(h);
                }
                let ydiff: Vec<C64> = y1.iter().zip(&y).map(|(a, b)| a - b).collect();
                let bspl: Vec<C64> = (0..y.len()).map(|i| h * k[0][i] - ydiff[i]).collect();
                let c3: Vec<C64> = (0..y.len())
                    .map(|i| ydiff[i] - h * k[6][i] - bspl[i])
                    .collect();
                let c4 = axpy(&vec![C64::new(0.0, 0.0); y.len()], h, &D, &k);
                let step = Step {
                    t0: t,
                    h,
                    cont: [y.clone(), ydiff, bspl, c3, c4],
                };
                stats.accepted += 1;
                stats.max_local_error = stats.max_local_error.max(err_max);
                t = if last { t1 } else { t + h };
                y = y1;
                k1 = k.into_iter().nth(6).unwrap_or_default();
                on_step(&step)?;
                streak = 0;
                last_rejected = false;
                h = hnew;
            }
            outcome => {
                stats.rejected += 1;
                streak += 1;
                if streak >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
                h = match outcome {
                    Attempt::Done { err, .. } if err.is_finite() => {
                        h / (1.0 / FAC_MIN).min(err.powf(expo1) / SAFETY)
                    }
                    _ => 0.5 * h,
                };
                last_rejected = true;
            }
        }
    }
    Ok((y, stats))
}

/// Fixed-step fifth-order integration without error control.
pub fn solve_fixed<R>(mut rhs: R, y0: Vec<C64>, t0: f64, t1: f64, steps: usize) -> Result<Vec<C64>>
where
    R: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let mut k: Vec<Vec<C64>> = vec![rhs(t, &y)?];
        for st in 1..7 {
            let ys = axpy(&y, h, A[st], &k);
            if st == 6 {
                y = ys;
                break;
            }
            k.push(rhs(t + C[st] * h, &ys)?);
        }
    }
    Ok(y)
}
