//! Seeded random inputs for the property suites.
//!
//! All generators draw from a ChaCha8 stream, so a (seed, stream) pair fixes
//! every sample independently of thread count and platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DomainPoint;
use crate::fields::DiscreteMeasure;
use crate::{Result, C64};

/// Generator for one independent stream of a seeded run.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// 10^U(log10 lo, log10 hi).
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..=hi.log10()))
}

/// Uniform in the square [−r, r]².
pub fn complex_in_square<R: Rng>(rng: &mut R, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r))
}

pub fn complex_vector<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<C64> {
    (0..n).map(|_| complex_in_square(rng, r)).collect()
}

/// A vector with ‖v‖ = `norm` in a uniformly random direction.
pub fn vector_with_norm<R: Rng>(rng: &mut R, n: usize, norm: f64) -> Vec<C64> {
    if n == 0 {
        return Vec::new();
    }
    loop {
        let v = complex_vector(rng, n, 1.0);
        let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-3 {
            return v.into_iter().map(|c| c * (norm / len)).collect();
        }
    }
}

/// Siegel point with Re z₁ ∈ [−2, 2], ‖z̃‖ ≤ `tail_max` and
/// Im z₁ − ‖z̃‖² log-uniform in `margin`.
pub fn siegel_point<R: Rng>(
    rng: &mut R,
    n: usize,
    tail_max: f64,
    margin: (f64, f64),
) -> Result<DomainPoint> {
    let r = rng.gen_range(0.0..=tail_max);
    let tail = vector_with_norm(rng, n - 1, r);
    let m = log_uniform(rng, margin.0, margin.1);
    let tail_sq: f64 = tail.iter().map(|c| c.norm_sqr()).sum();
    let mut coords = vec![C64::new(rng.gen_range(-2.0..=2.0), tail_sq + m)];
    coords.extend(tail);
    DomainPoint::siegel(coords)
}

/// Ball point with ‖w‖ ≤ `r_max`.
pub fn ball_point<R: Rng>(rng: &mut R, n: usize, r_max: f64) -> Result<DomainPoint> {
    let r = rng.gen_range(0.0..=r_max);
    DomainPoint::ball(vector_with_norm(rng, n, r))
}

/// Half-plane point with Re ζ ∈ [−5, 5] and Im ζ log-uniform in [lo, hi].
pub fn half_plane_point<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    C64::new(rng.gen_range(-5.0..=5.0), log_uniform(rng, lo, hi))
}

/// Measure with `atoms` atoms, locations in [−2, 2], masses in [0.05, 1].
pub fn measure<R: Rng>(rng: &mut R, atoms: usize) -> Result<DiscreteMeasure> {
    let pairs: Vec<(f64, f64)> = (0..atoms)
        .map(|_| (rng.gen_range(-2.0..=2.0), rng.gen_range(0.05..=1.0)))
        .collect();
    DiscreteMeasure::from_pairs(&pairs)
}
