//! Ermakov system families and the maps between them.
//!
//! Every family that can be integrated in polar form implements
//! [`PolarSystem`]; the angular equation is shared by all of them and only
//! the radial acceleration differs.

mod cartesian;
mod kepler;
pub(crate) mod linearizable;
mod polar;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Expr};

pub use cartesian::{coupling_from_fg, polar_from_cartesian, potential_from_fg, potential_integral, CartesianSpec};
pub use kepler::{winternitz_hamiltonian, winternitz_system, KeplerErmakovSpec, WinternitzParams};
pub use linearizable::{free_motion_system, quasi_invariance_map, BarredSystem, FreeMotionSystem, LinearizableSpec};
pub use polar::{absorb_coupling, PolarSpec};

/// Variable names understood by the system builders.
pub mod vars {
    pub const T: &str = "t";
    pub const R: &str = "r";
    pub const THETA: &str = "theta";
    pub const RDOT: &str = "rdot";
    pub const THETADOT: &str = "thetadot";
    /// `r^2 * thetadot`
    pub const L: &str = "L";
    pub const X: &str = "x";
    pub const Y: &str = "y";
    pub const XDOT: &str = "xdot";
    pub const YDOT: &str = "ydot";
    /// argument of the coupling `f`, standing for `y/x`
    pub const U: &str = "u";
    /// argument of the coupling `g`, standing for `x/y`
    pub const V: &str = "v";

    pub const RESERVED: [&str; 13] = [T, R, THETA, RDOT, THETADOT, L, X, Y, XDOT, YDOT, U, V, "pi"];
}

/// Position and velocity in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
}

/// Polar position and velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarState {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub rdot: f64,
    pub thetadot: f64,
}

impl CartesianState {
    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.xdot, self.ydot]
    }

    pub fn from_array(t: f64, y: &[f64; 4]) -> Self {
        CartesianState {
            t,
            x: y[0],
            y: y[1],
            xdot: y[2],
            ydot: y[3],
        }
    }

    pub fn to_polar(&self) -> Result<PolarState> {
        let r2 = self.x * self.x + self.y * self.y;
        if r2 == 0.0 {
            return Err(Error::InvalidInput("the origin has no polar representation".into()));
        }
        let r = r2.sqrt();
        Ok(PolarState {
            t: self.t,
            r,
            theta: self.y.atan2(self.x),
            rdot: (self.x * self.xdot + self.y * self.ydot) / r,
            thetadot: (self.x * self.ydot - self.y * self.xdot) / r2,
        })
    }

    pub(crate) fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            vars::T => Some(self.t),
            vars::X => Some(self.x),
            vars::Y => Some(self.y),
            vars::XDOT => Some(self.xdot),
            vars::YDOT => Some(self.ydot),
            _ => None,
        }
    }
}

impl PolarState {
    pub fn to_array(&self) -> [f64; 4] {
        [self.r, self.theta, self.rdot, self.thetadot]
    }

    pub fn from_array(t: f64, y: &[f64; 4]) -> Self {
        PolarState {
            t,
            r: y[0],
            theta: y[1],
            rdot: y[2],
            thetadot: y[3],
        }
    }

    /// `r^2 * thetadot`, the on-shell value of `h` up to its sign.
    pub fn angular_momentum(&self) -> f64 {
        self.r * self.r * self.thetadot
    }

    pub fn to_cartesian(&self) -> CartesianState {
        let (s, c) = self.theta.sin_cos();
        CartesianState {
            t: self.t,
            x: self.r * c,
            y: self.r * s,
            xdot: self.rdot * c - self.r * self.thetadot * s,
            ydot: self.rdot * s + self.r * self.thetadot * c,
        }
    }

    pub(crate) fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            vars::T => Some(self.t),
            vars::R => Some(self.r),
            vars::THETA => Some(self.theta),
            vars::RDOT => Some(self.rdot),
            vars::THETADOT => Some(self.thetadot),
            vars::L => Some(self.angular_momentum()),
            _ => None,
        }
    }

    pub(crate) fn require_positive_radius(&self) -> Result<()> {
        if self.r > 0.0 {
            Ok(())
        } else {
            Err(Error::Eval(EvalError::Domain {
                op: "radius",
                value: self.r,
            }))
        }
    }
}

/// A planar system whose angular equation is
/// `r thetaddot + 2 rdot thetadot = -V'(theta)/r^3`.
pub trait PolarSystem {
    /// `V(theta)`.
    fn potential(&self) -> &Expr;

    /// `dV/dtheta`.
    fn potential_slope(&self) -> &Expr;

    /// `F(theta)`, the inverse-cube radial coupling.
    fn coupling(&self) -> &Expr;

    /// Time-dependent scale `rho(t)`, for families that carry one.
    fn scale(&self) -> Option<&Expr> {
        None
    }

    /// `rddot` at the given state.
    fn radial_accel(&self, s: &PolarState) -> Result<f64>;

    /// Time derivative of `(r, theta, rdot, thetadot)`.
    fn rates(&self, s: &PolarState) -> Result<[f64; 4]> {
        s.require_positive_radius()?;
        let rddot = self.radial_accel(s)?;
        let slope = self.potential_slope().eval_at(vars::THETA, s.theta)?;
        let thetaddot = (-slope / s.r.powi(3) - 2.0 * s.rdot * s.thetadot) / s.r;
        Ok([s.rdot, s.thetadot, rddot, thetaddot])
    }
}

/// Time derivative of a polar state for any system family.
pub fn rhs_polar<S: PolarSystem + ?Sized>(system: &S, s: &PolarState) -> Result<[f64; 4]> {
    system.rates(s)
}

/// `F(theta)/r^3`, skipped entirely when `F` is the literal zero so that
/// the axes stay regular.
pub(crate) fn coupling_term(coupling: &Expr, s: &PolarState) -> Result<f64> {
    if coupling.is_zero_literal() {
        Ok(0.0)
    } else {
        Ok(coupling.eval_at(vars::THETA, s.theta)? / s.r.powi(3))
    }
}

/// Reject expressions that read variables outside `allowed`.
pub fn check_vars(e: &Expr, allowed: &[&str], label: &str) -> Result<()> {
    let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
    let stray: Vec<String> = e
        .free_vars()
        .into_iter()
        .filter(|v| !allowed.contains(v.as_str()))
        .collect();
    if stray.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{label} may only use {:?}, found {:?}",
            allowed, stray
        )))
    }
}
