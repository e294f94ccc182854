use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::invariant::h;
use crate::model::WinternitzParams;
use crate::numeric::{self, QuadTolerance};

/// Lower limit of the new-time integral.
pub const T_BASE_POINT: f64 = FRAC_PI_2;

/// `T(theta) = int_{pi/2}^{theta} dl / h(l; I) + J` by adaptive quadrature.
pub fn quadrature_t(theta: f64, invariant: f64, potential: &Expr, j: f64) -> Result<f64> {
    let tol = QuadTolerance { abs: 1e-14, rel: 1e-13 };
    Ok(numeric::integrate(|l| Ok(1.0 / h(l, invariant, potential)?), T_BASE_POINT, theta, tol)? + j)
}

fn asin_argument(p: &WinternitzParams, invariant: f64, theta: f64) -> Option<f64> {
    let disc = p.g2 * p.g2 + 4.0 * invariant * (invariant - p.g1);
    if !(invariant > 0.0 && disc > 0.0) {
        return None;
    }
    let w = (2.0 * invariant * theta.cos() + p.g2) / disc.sqrt();
    (w.abs() <= 1.0).then_some(w)
}

/// Closed form of [`quadrature_t`] for the Winternitz potential,
/// `-(asin(w(theta)) - asin(w(pi/2))) / sqrt(2 I) + J` with
/// `w = (2 I cos theta + g2) / sqrt(g2^2 + 4 I (I - g1))`.
///
/// `None` outside `(0, pi)`, for `I <= 0`, for a non-positive
/// discriminant, or where `|w| > 1`.
pub fn winternitz_t_closed_form(p: &WinternitzParams, invariant: f64, theta: f64, j: f64) -> Option<f64> {
    if !(theta > 0.0 && theta < PI) {
        return None;
    }
    let w = asin_argument(p, invariant, theta)?;
    let w0 = asin_argument(p, invariant, T_BASE_POINT)?;
    Some(-(w.asin() - w0.asin()) / (2.0 * invariant).sqrt() + j)
}

/// `psi(T) = c1 cos(k T) + c2 sin(k T) + mu0 / k^2` with
/// `k^2 = 2 (I + g3)`, as a function of the angle.
#[derive(Clone, Debug)]
pub struct KeplerClosedForm {
    params: WinternitzParams,
    invariant: f64,
    c1: f64,
    c2: f64,
    j: f64,
    frequency: f64,
    potential: Expr,
}

impl KeplerClosedForm {
    pub fn new(p: &WinternitzParams, invariant: f64, c1: f64, c2: f64, j: f64) -> Result<Self> {
        p.validate()?;
        let k2 = 2.0 * (invariant + p.g3);
        if !(k2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "closed form needs I + g3 > 0 (I = {invariant}, g3 = {})",
                p.g3
            )));
        }
        Ok(KeplerClosedForm {
            params: *p,
            invariant,
            c1,
            c2,
            j,
            frequency: k2.sqrt(),
            potential: p.potential(),
        })
    }

    /// Angular frequency in the new time.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// The constant particular solution `mu0 / (2 (I + g3))`.
    pub fn equilibrium(&self) -> f64 {
        self.params.mu0 / (self.frequency * self.frequency)
    }

    /// New time at `theta`, closed form when valid, else quadrature.
    pub fn new_time(&self, theta: f64) -> Result<f64> {
        // the forbidden region check is shared by both paths
        h(theta, self.invariant, &self.potential)?;
        match winternitz_t_closed_form(&self.params, self.invariant, theta, self.j) {
            Some(t) => Ok(t),
            None => quadrature_t(theta, self.invariant, &self.potential, self.j),
        }
    }

    pub fn psi(&self, theta: f64) -> Result<f64> {
        let (s, c) = (self.frequency * self.new_time(theta)?).sin_cos();
        Ok(self.c1 * c + self.c2 * s + self.equilibrium())
    }

    /// `dpsi/dtheta = (dpsi/dT) / h`.
    pub fn psi_slope(&self, theta: f64) -> Result<f64> {
        let hv = h(theta, self.invariant, &self.potential)?;
        let (s, c) = (self.frequency * self.new_time(theta)?).sin_cos();
        Ok(self.frequency * (self.c2 * c - self.c1 * s) / hv)
    }
}

/// `psi(theta)` of the Winternitz example in closed form.
pub fn kepler_closed_form(p: &WinternitzParams, invariant: f64, c1: f64, c2: f64, j: f64, theta: f64) -> Result<f64> {
    KeplerClosedForm::new(p, invariant, c1, c2, j)?.psi(theta)
}
