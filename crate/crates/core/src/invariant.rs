//! The Lewis-Ray-Reid invariant and the on-shell angular momentum `h`.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::vars::THETA;
use crate::model::{potential_integral, CartesianState, PolarState};

/// A value of the invariant together with the potential convention it was
/// computed under.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantValue {
    pub value: f64,
    pub convention: &'static str,
}

impl InvariantValue {
    pub const POLAR: &'static str = "V as supplied";
    pub const CARTESIAN: &'static str = "U(w) measured from w = 1 (w = -1 on the negative branch)";
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.convention)
    }
}

impl From<InvariantValue> for f64 {
    fn from(v: InvariantValue) -> f64 {
        v.value
    }
}

/// Direction of angular motion, fixed by the initial sign of `thetadot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchSign {
    Positive,
    Negative,
}

impl BranchSign {
    /// A zero rate has no branch; it is reported as a turning point.
    pub fn from_rate(thetadot: f64, theta: f64) -> Result<Self> {
        if thetadot > 0.0 {
            Ok(BranchSign::Positive)
        } else if thetadot < 0.0 {
            Ok(BranchSign::Negative)
        } else {
            Err(Error::TurningPoint { theta })
        }
    }

    pub fn value(self) -> f64 {
        match self {
            BranchSign::Positive => 1.0,
            BranchSign::Negative => -1.0,
        }
    }
}

/// `I = (r^2 thetadot)^2 / 2 + V(theta)`.
pub fn lewis_ray_reid_polar(s: &PolarState, potential: &Expr) -> Result<InvariantValue> {
    s.require_positive_radius()?;
    let momentum = s.angular_momentum();
    Ok(InvariantValue {
        value: 0.5 * momentum * momentum + potential.eval_at(THETA, s.theta)?,
        convention: InvariantValue::POLAR,
    })
}

/// `I = (x ydot - y xdot)^2 / 2 + U(y/x)`.
pub fn lewis_ray_reid_cartesian(s: &CartesianState, f: &Expr, g: &Expr) -> Result<InvariantValue> {
    let cross = s.x * s.ydot - s.y * s.xdot;
    let u = if f.is_zero_literal() && g.is_zero_literal() {
        0.0
    } else {
        if s.x == 0.0 || s.y == 0.0 {
            return Err(Error::AxisCrossing { x: s.x, y: s.y });
        }
        potential_integral(f, g, s.y / s.x)?
    };
    Ok(InvariantValue {
        value: 0.5 * cross * cross + u,
        convention: InvariantValue::CARTESIAN,
    })
}

/// Width of the band around `I = V` treated as a turning point.
pub fn turning_tolerance(invariant: f64) -> f64 {
    1e-12 * (1.0 + invariant.abs())
}

/// `h(theta; I) = sqrt(2 (I - V(theta)))`, the non-negative root.
pub fn h(theta: f64, invariant: f64, potential: &Expr) -> Result<f64> {
    let v = potential.eval_at(THETA, theta)?;
    h_from_potential(theta, invariant, v)
}

pub(crate) fn h_from_potential(theta: f64, invariant: f64, v: f64) -> Result<f64> {
    let gap = invariant - v;
    if gap.abs() <= turning_tolerance(invariant) {
        return Err(Error::TurningPoint { theta });
    }
    if gap < 0.0 {
        return Err(Error::ForbiddenRegion {
            theta,
            invariant,
            potential: v,
        });
    }
    Ok((2.0 * gap).sqrt())
}

/// `thetadot = sign * h(theta; I) / r^2`.
pub fn theta_dot_from_invariant(r: f64, theta: f64, invariant: f64, potential: &Expr, sign: BranchSign) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    Ok(sign.value() * h(theta, invariant, potential)? / (r * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_PI_2;

    fn state(r: f64, theta: f64, rdot: f64, thetadot: f64) -> PolarState {
        PolarState {
            t: 0.0,
            r,
            theta,
            rdot,
            thetadot,
        }
    }

    #[test]
    fn polar_values() {
        assert_eq!(
            lewis_ray_reid_polar(&state(1.0, FRAC_PI_2, 0.0, 2.0), &Expr::zero())
                .unwrap()
                .value,
            2.0
        );
        let v = parse("(1 + 0*cos(theta))/sin(theta)^2").unwrap();
        let i = lewis_ray_reid_polar(&state(1.0, FRAC_PI_2, 0.0, 2.0), &v).unwrap();
        assert!((i.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cartesian_values() {
        let c = CartesianState {
            t: 0.0,
            x: 1.0,
            y: 1.0,
            xdot: 0.0,
            ydot: 1.0,
        };
        assert_eq!(
            lewis_ray_reid_cartesian(&c, &Expr::zero(), &Expr::zero())
                .unwrap()
                .value,
            0.5
        );
        let c = CartesianState {
            t: 0.0,
            x: 1.0,
            y: 2.0,
            xdot: 0.0,
            ydot: 0.0,
        };
        let i = lewis_ray_reid_cartesian(&c, &parse("u").unwrap(), &Expr::zero()).unwrap();
        assert!((i.value - 1.5).abs() < 1e-13);
    }

    #[test]
    fn cartesian_and_polar_agree() {
        let f = parse("u^2 + 1").unwrap();
        let g = parse("0.5*v").unwrap();
        let v = crate::model::potential_from_fg(&f, &g).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let c = CartesianState {
                t: 0.0,
                x: rng.random_range(0.3..2.0),
                y: rng.random_range(0.3..2.0),
                xdot: rng.random_range(-1.0..1.0),
                ydot: rng.random_range(-1.0..1.0),
            };
            let a = lewis_ray_reid_cartesian(&c, &f, &g).unwrap().value;
            let b = lewis_ray_reid_polar(&c.to_polar().unwrap(), &v).unwrap().value;
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn h_values_and_boundaries() {
        assert_eq!(h(0.3, 2.0, &Expr::zero()).unwrap(), 2.0);
        let v = parse("1/sin(theta)^2").unwrap();
        assert!((h(FRAC_PI_2, 3.0, &v).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(h(FRAC_PI_2, 1.0, &v), Err(Error::TurningPoint { .. })));
        assert!(matches!(h(FRAC_PI_2, 0.5, &v), Err(Error::ForbiddenRegion { .. })));
    }

    #[test]
    fn h_squared_plus_twice_v_is_twice_i() {
        let v = parse("0.3*sin(theta)^2").unwrap();
        for k in 0..50 {
            let th = 0.1 * k as f64;
            let hv = h(th, 0.5, &v).unwrap();
            let vv = v.eval_at(THETA, th).unwrap();
            assert!((hv * hv + 2.0 * vv - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_dot_from_invariant_values() {
        let z = Expr::zero();
        assert_eq!(
            theta_dot_from_invariant(1.0, 0.0, 2.0, &z, BranchSign::Positive).unwrap(),
            2.0
        );
        assert_eq!(
            theta_dot_from_invariant(2.0, 0.0, 2.0, &z, BranchSign::Positive).unwrap(),
            0.5
        );
        assert_eq!(
            theta_dot_from_invariant(2.0, 0.0, 2.0, &z, BranchSign::Negative).unwrap(),
            -0.5
        );
    }

    #[test]
    fn branch_from_rate() {
        assert_eq!(BranchSign::from_rate(0.1, 0.0).unwrap(), BranchSign::Positive);
        assert_eq!(BranchSign::from_rate(-3.0, 0.0).unwrap().value(), -1.0);
        assert!(BranchSign::from_rate(0.0, 0.7).is_err());
    }
}
