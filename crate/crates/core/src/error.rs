use thiserror::Error;

use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("expected {expected} field components, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("field evaluation failed: {0}")]
    FieldEvaluation(String),

    #[error("Re p = {value:e} < 0 at z = {at}; p does not map the disc into the right half-plane")]
    HalfPlaneCondition { at: C64, value: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}) after repeated rejections")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("Herglotz pieces do not cover [0, {end}]: gap or overlap at t = {at}")]
    CoverageGap { at: f64, end: f64 },

    #[error("|u| decreased from {u_start} at t = {t_start} to {u_end} at t = {t_end}")]
    MonotonicityViolation {
        t_start: f64,
        t_end: f64,
        u_start: f64,
        u_end: f64,
    },

    #[error("bound violated ({what}): {lhs} > {rhs}")]
    BoundViolation { what: String, lhs: f64, rhs: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numerical failures, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. } | Error::FieldEvaluation(_)
        )
    }

    /// Violations of a checked inequality or monotonicity property.
    pub fn is_violation(&self) -> bool {
        matches!(
            self,
            Error::MonotonicityViolation { .. }
                | Error::BoundViolation { .. }
                | Error::HalfPlaneCondition { .. }
        )
    }
}
