//! Numerical laboratory for generalized Ermakov systems.
//!
//! The crate builds Ermakov systems from user expressions ([`expr`],
//! [`model`]), integrates them directly ([`integrate`]), evaluates the
//! Lewis-Ray-Reid invariant ([`invariant`]), and solves the same dynamics a
//! second way through the linear equation for `psi = rho/r` with the angle
//! as independent variable, followed by a time quadrature ([`linearize`]).
//! The two routes are meant to be checked against each other.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod integrate;
pub mod invariant;
pub mod linearize;
pub mod model;
pub mod numeric;

pub use error::{Error, Result};
pub use expr::{parse, Bindings, Expr};
pub use integrate::{IntegratorConfig, Trajectory};
pub use invariant::{BranchSign, InvariantValue};
pub use model::{
    CartesianSpec, CartesianState, KeplerErmakovSpec, LinearizableSpec, PolarSpec, PolarState, PolarSystem,
    WinternitzParams,
};
