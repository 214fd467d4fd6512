//! Geometry and dynamics of chordal infinitesimal generators on the Siegel
//! upper half-space and the Euclidean unit ball.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: model domains, Cayley transforms, Poisson kernels, horospheres
//!   and the invariant metric.
//! * [`geodesics`]: normalized complex geodesics through infinity, the
//!   Lempert projection onto them and slice reduction of vector fields.
//! * [`fields`]: holomorphic vector fields: a small expression language,
//!   built-in fields and the Berkson–Porta and Cauchy constructors.
//! * [`analysis`]: capacity estimation and sampled class-membership checks.
//! * [`flows`]: adaptive integration of the semigroup and Loewner
//!   equations, flow-map checks and iteration diagnostics.
//! * [`verify`]: the invariant suites behind `chordal verify`.

// Negated float comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod domain;
mod error;
pub mod fields;
pub mod flows;
pub mod geodesics;
pub mod sampling;
pub mod serial;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
