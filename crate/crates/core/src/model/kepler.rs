use crate::error::{Error, Result};
use crate::expr::Expr;

use super::vars::THETA;
use super::{check_vars, coupling_term, LinearizableSpec, PolarState, PolarSystem};

/// `rddot - r thetadot^2 = F(theta)/r^3 - G(theta)/r^2` with the shared
/// angular equation.
#[derive(Clone, Debug)]
pub struct KeplerErmakovSpec {
    coupling: Expr,
    inverse_square: Expr,
    potential: Expr,
    potential_slope: Expr,
}

impl KeplerErmakovSpec {
    /// `coupling` is `F`, `inverse_square` is `G`; all three in `theta`.
    pub fn new(coupling: Expr, inverse_square: Expr, potential: Expr) -> Result<Self> {
        check_vars(&coupling, &[THETA], "F")?;
        check_vars(&inverse_square, &[THETA], "G")?;
        check_vars(&potential, &[THETA], "V")?;
        let potential_slope = potential.derivative(THETA);
        Ok(KeplerErmakovSpec {
            coupling,
            inverse_square,
            potential,
            potential_slope,
        })
    }

    pub fn inverse_square(&self) -> &Expr {
        &self.inverse_square
    }

    /// The same dynamics as a member of the linearizable family:
    /// `A = B = 0`, `C = G`, `rho = 1`.
    pub fn to_linearizable(&self) -> Result<LinearizableSpec> {
        LinearizableSpec::new(
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            self.inverse_square.clone(),
            self.coupling.clone(),
            self.potential.clone(),
        )
    }
}

impl PolarSystem for KeplerErmakovSpec {
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
        let g = self.inverse_square.eval_at(THETA, s.theta)?;
        Ok(s.r * s.thetadot * s.thetadot + coupling_term(&self.coupling, s)? - g / (s.r * s.r))
    }
}

/// Constants of the non-central Kepler Hamiltonian
/// `H = (p_r^2 + p_theta^2/r^2)/2 - mu0/r + ((g1 + g2 cos theta)/sin^2 theta + g3)/r^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WinternitzParams {
    pub mu0: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl WinternitzParams {
    /// All four must be finite and non-negative. Zero values are accepted
    /// for degenerate checks (`mu0 = 0` removes the Kepler term, `g3 = 0`
    /// the separable case, `g2 = 0` the symmetric barrier).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu0", self.mu0), ("g1", self.g1), ("g2", self.g2), ("g3", self.g3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "Winternitz parameter {name} = {v} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// `V(theta) = (g1 + g2 cos theta)/sin^2 theta`.
    pub fn potential(&self) -> Expr {
        let th = Expr::var(THETA);
        Expr::div(
            Expr::add(Expr::num(self.g1), Expr::mul(Expr::num(self.g2), Expr::cos(th.clone()))),
            Expr::powi(Expr::sin(th), 2),
        )
    }
}

/// The Kepler-Ermakov system generated by the Hamiltonian's canonical
/// equations: `V` as above, `F = 2 (V + g3)`, `G = mu0`.
pub fn winternitz_system(p: &WinternitzParams) -> Result<KeplerErmakovSpec> {
    p.validate()?;
    let v = p.potential();
    let f = Expr::mul(Expr::num(2.0), Expr::add(v.clone(), Expr::num(p.g3)));
    KeplerErmakovSpec::new(f, Expr::num(p.mu0), v)
}

/// The Hamiltonian at a polar state, with `p_r = rdot`, `p_theta = r^2 thetadot`.
pub fn winternitz_hamiltonian(p: &WinternitzParams, s: &PolarState) -> Result<f64> {
    let v = p.potential().eval_at(THETA, s.theta)?;
    let kinetic = 0.5 * (s.rdot * s.rdot + s.r * s.r * s.thetadot * s.thetadot);
    Ok(kinetic - p.mu0 / s.r + (v + p.g3) / (s.r * s.r))
}
