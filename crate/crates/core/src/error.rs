use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::integrate::EventKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("forbidden region at theta = {theta}: invariant {invariant} is below the potential {potential}")]
    ForbiddenRegion { theta: f64, invariant: f64, potential: f64 },
    #[error("turning point at theta = {theta}")]
    TurningPoint { theta: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("integration stopped by {kind} event at t = {t}")]
    EventTermination { kind: EventKind, t: f64 },
    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64 },
    #[error("axis crossing at (x, y) = ({x}, {y}) with a nonzero coupling function")]
    AxisCrossing { x: f64, y: f64 },
    #[error("scale function rho vanishes near t = {t}")]
    ScaleZero { t: f64 },
    #[error("psi = {psi} is not positive at theta = {theta}")]
    PsiNonPositive { theta: f64, psi: f64 },
    #[error("{what} = {value} outside the covered window [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("no sign change of the target on [{a}, {b}]")]
    NoBracket { a: f64, b: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
