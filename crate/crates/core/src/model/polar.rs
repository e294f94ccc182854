use crate::error::Result;
use crate::expr::Expr;

use super::vars::{R, RDOT, T, THETA, THETADOT};
use super::{check_vars, coupling_term, PolarState, PolarSystem};

/// `rddot - r thetadot^2 + w^2 r = F(theta)/r^3` with the shared angular
/// equation.
#[derive(Clone, Debug)]
pub struct PolarSpec {
    coupling: Expr,
    potential: Expr,
    omega_sq: Expr,
    potential_slope: Expr,
}

impl PolarSpec {
    pub fn new(coupling: Expr, potential: Expr, omega_sq: Expr) -> Result<Self> {
        check_vars(&coupling, &[THETA], "F")?;
        check_vars(&potential, &[THETA], "V")?;
        check_vars(&omega_sq, &[T, R, THETA, RDOT, THETADOT], "omega_sq")?;
        let potential_slope = potential.derivative(THETA);
        Ok(PolarSpec {
            coupling,
            potential,
            omega_sq,
            potential_slope,
        })
    }

    pub fn omega_sq(&self) -> &Expr {
        &self.omega_sq
    }
}

impl PolarSystem for PolarSpec {
    fn potential(&self) -> &Expr {
        &self.potential
    }

    fn potential_slope(&self) -> &Expr {
        &self.potential_slope
    }

    fn coupling(&self) -> &Expr {
        &self.coupling
    }

    fn radial_accel(&self, s: &PolarState) -> Result<f64> {
        let w2 = self.omega_sq.eval_with(&|n: &str| s.lookup(n))?;
        Ok(s.r * s.thetadot * s.thetadot - w2 * s.r + coupling_term(&self.coupling, s)?)
    }
}

/// Fold `F` into the frequency: `w^2 -> w^2 - F(theta)/r^4`, `F -> 0`.
/// The trajectories are unchanged.
pub fn absorb_coupling(spec: &PolarSpec) -> PolarSpec {
    if spec.coupling.is_zero_literal() {
        return spec.clone();
    }
    let omega_sq = Expr::sub(
        spec.omega_sq.clone(),
        Expr::div(spec.coupling.clone(), Expr::powi(Expr::var(R), 4)),
    );
    PolarSpec {
        coupling: Expr::zero(),
        potential: spec.potential.clone(),
        omega_sq,
        potential_slope: spec.potential_slope.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    #[test]
    fn circular_orbit_of_isotropic_oscillator() {
        let spec = PolarSpec::new(Expr::zero(), Expr::zero(), Expr::one()).unwrap();
        let s = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        assert_eq!(spec.rates(&s).unwrap(), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn absorb_is_identity_without_coupling() {
        let spec = PolarSpec::new(Expr::zero(), parse("sin(theta)").unwrap(), parse("r").unwrap()).unwrap();
        let out = absorb_coupling(&spec);
        assert_eq!(out.omega_sq(), spec.omega_sq());
        assert_eq!(out.potential(), spec.potential());
    }

    #[test]
    fn absorb_is_idempotent() {
        let spec = PolarSpec::new(Expr::one(), Expr::zero(), Expr::zero()).unwrap();
        let once = absorb_coupling(&spec);
        let twice = absorb_coupling(&once);
        assert!(once.coupling().is_zero_literal());
        assert_eq!(once.omega_sq(), twice.omega_sq());
        assert_eq!(once.coupling(), twice.coupling());
        let s = PolarState {
            t: 0.0,
            r: 2.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 0.0,
        };
        let w2 = once.omega_sq().eval_with(&|n: &str| s.lookup(n)).unwrap();
        assert_eq!(w2, -1.0 / 16.0);
        assert_eq!(once.rates(&s).unwrap(), spec.rates(&s).unwrap());
    }

    #[test]
    fn rejects_foreign_variables() {
        assert!(PolarSpec::new(parse("r").unwrap(), Expr::zero(), Expr::zero()).is_err());
        assert!(PolarSpec::new(Expr::zero(), parse("t").unwrap(), Expr::zero()).is_err());
        assert!(PolarSpec::new(Expr::zero(), Expr::zero(), parse("x").unwrap()).is_err());
    }
}
