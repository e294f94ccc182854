//! The linear equation for `psi = rho/r` with the angle as independent
//! variable, its numerical solution, and the time quadrature that turns a
//! solution back into `r(t)` and `theta(t)`.
//!
//! At a fixed invariant value `I` the equation reads
//! `p2 psi'' + p1 psi' + p0 psi = rhs` with `p2 = h^2`, `p1 = h h' - a`,
//! `p0 = h^2 + F - b`, `rhs = c`, where `h = sqrt(2 (I - V))` and
//! `(a, b, c)` come from the system's `(A, B, C)` at `L = sign * h`.

mod kepler;
mod quadrature;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::invariant::{h_from_potential, turning_tolerance, BranchSign};
use crate::model::vars::THETA;
use crate::model::{LinearizableSpec, PolarState, PolarSystem};
use crate::numeric;

pub use kepler::{kepler_closed_form, quadrature_t, winternitz_t_closed_form, KeplerClosedForm, T_BASE_POINT};
pub use quadrature::{
    initial_psi, invert_theta_of_t, reconstruct, reconstruct_orbit, reconstruct_radial, time_quadrature,
    PipelineOptions, PsiProfile, QuadratureSolution, Reconstruction,
};

/// Coefficients of the linear equation at one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
    pub rhs: f64,
}

/// The linear equation at a fixed invariant value on an angular interval.
#[derive(Clone, Debug)]
pub struct LinearODE {
    spec: LinearizableSpec,
    invariant: f64,
    branch: BranchSign,
    domain: (f64, f64),
}

impl LinearODE {
    pub fn spec(&self) -> &LinearizableSpec {
        &self.spec
    }

    pub fn invariant(&self) -> f64 {
        self.invariant
    }

    pub fn branch(&self) -> BranchSign {
        self.branch
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// True when `C` is the literal zero, in which case `rhs` is exactly 0.
    pub fn is_homogeneous(&self) -> bool {
        self.spec.cubic_term().is_zero_literal()
    }

    pub fn coefficients(&self, theta: f64) -> Result<Coefficients> {
        let v = self.spec.potential().eval_at(THETA, theta)?;
        let h = h_from_potential(theta, self.invariant, v)?;
        let p2 = 2.0 * (self.invariant - v);
        // h dh/dtheta = -dV/dtheta
        let hh = -self.spec.potential_slope().eval_at(THETA, theta)?;
        let (a, b, c) = self.spec.linear_terms(theta, self.branch.value() * h)?;
        let coupling = if self.spec.coupling().is_zero_literal() {
            0.0
        } else {
            self.spec.coupling().eval_at(THETA, theta)?
        };
        Ok(Coefficients {
            p2,
            p1: hh - a,
            p0: p2 + coupling - b,
            rhs: if self.is_homogeneous() { 0.0 } else { c },
        })
    }

    /// `psi''` for the given `psi`, `psi'`; the forcing is included only
    /// when `forced` is set.
    fn second_derivative(&self, k: &Coefficients, psi: f64, slope: f64, forced: bool) -> f64 {
        let drive = if forced { k.rhs } else { 0.0 };
        (drive - k.p1 * slope - k.p0 * psi) / k.p2
    }
}

/// The first angle moving from `from` toward `to` where `I - V` drops to
/// the turning-point band, or where `V` cannot be evaluated. Returns the
/// angle and the potential there (infinite when it failed to evaluate).
pub fn find_boundary(potential: &Expr, invariant: f64, from: f64, to: f64) -> Result<Option<(f64, f64)>> {
    const STEP: f64 = 1e-3;
    let tol = turning_tolerance(invariant);
    let gap = |theta: f64| potential.eval_at(THETA, theta).map(|v| invariant - v - tol);
    let allowed = |theta: f64| matches!(gap(theta), Ok(g) if g > 0.0);
    if !allowed(from) {
        let v = potential.eval_at(THETA, from).unwrap_or(f64::INFINITY);
        return Ok(Some((from, v)));
    }
    let n = (((to - from).abs() / STEP).ceil() as usize).max(400);
    let mut prev = from;
    for k in 1..=n {
        let theta = from + (to - from) * k as f64 / n as f64;
        if allowed(theta) {
            prev = theta;
            continue;
        }
        let star = match gap(theta) {
            Ok(_) => numeric::brent(|x| Ok(gap(x)?), prev, theta, 1e-15, 0.0)?,
            Err(_) => numeric::bisect(|x| Ok(if allowed(x) { 1.0 } else { -1.0 }), prev, theta, 1e-14)?,
        };
        let v = potential.eval_at(THETA, star).unwrap_or(f64::INFINITY);
        return Ok(Some((star, v)));
    }
    Ok(None)
}

/// Fail with the first forbidden angle met when moving from `from` to `to`.
pub fn check_window(potential: &Expr, invariant: f64, from: f64, to: f64) -> Result<()> {
    match find_boundary(potential, invariant, from, to)? {
        None => Ok(()),
        Some((theta, potential)) => Err(Error::ForbiddenRegion {
            theta,
            invariant,
            potential,
        }),
    }
}

/// Build the linear equation on `domain`, which must lie where `I > V`.
pub fn build_linear_ode(
    spec: &LinearizableSpec,
    invariant: f64,
    branch: BranchSign,
    domain: (f64, f64),
) -> Result<LinearODE> {
    let (lo, hi) = domain;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "theta domain [{lo}, {hi}] must be finite and increasing"
        )));
    }
    check_window(spec.potential(), invariant, lo, hi)?;
    Ok(LinearODE {
        spec: spec.clone(),
        invariant,
        branch,
        domain,
    })
}

/// Tolerances used for the linear solves unless overridden.
pub fn linear_config() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_steps: 200_000,
        ..IntegratorConfig::default()
    }
}

/// Basis `psi1 (1, 0)`, `psi2 (0, 1)` and particular `psi_p (0, 0)` of
/// the linear equation, integrated on both sides of `theta0`, and the
/// combination `c1 psi1 + c2 psi2 + psi_p` matching the initial data.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    theta0: f64,
    c1: f64,
    c2: f64,
    // state (psi1, psi1', psi2, psi2', psi_p, psi_p') in the offset |theta - theta0|
    forward: Option<Trajectory<6>>,
    backward: Option<Trajectory<6>>,
    covered: (f64, f64),
}

impl LinearSolution {
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn constants(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    /// Angular interval on which the solution is available.
    pub fn covered(&self) -> (f64, f64) {
        self.covered
    }

    /// `(psi1, psi1', psi2, psi2', psi_p, psi_p')` at `theta`.
    pub fn basis(&self, theta: f64) -> Result<[f64; 6]> {
        let (lo, hi) = self.covered;
        let out_of_range = || Error::OutOfRange {
            what: "theta",
            value: theta,
            lo,
            hi,
        };
        // absorb rounding at the ends of the covered window
        let slack = 1e-12 * (1.0 + theta.abs());
        let theta = if theta > hi && theta - hi <= slack {
            hi
        } else if theta < lo && lo - theta <= slack {
            lo
        } else {
            theta
        };
        if theta >= self.theta0 {
            match &self.forward {
                Some(tr) => tr.eval((theta - self.theta0).min(tr.t_end())).ok_or_else(out_of_range),
                None if theta == self.theta0 => Ok([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
                None => Err(out_of_range()),
            }
        } else {
            match &self.backward {
                Some(tr) => tr.eval((self.theta0 - theta).min(tr.t_end())).ok_or_else(out_of_range),
                None => Err(out_of_range()),
            }
        }
    }

    fn combine(&self, y: &[f64; 6]) -> (f64, f64) {
        (
            self.c1 * y[0] + self.c2 * y[2] + y[4],
            self.c1 * y[1] + self.c2 * y[3] + y[5],
        )
    }

    pub fn psi(&self, theta: f64) -> Result<f64> {
        Ok(self.combine(&self.basis(theta)?).0)
    }

    pub fn psi_slope(&self, theta: f64) -> Result<f64> {
        Ok(self.combine(&self.basis(theta)?).1)
    }

    /// `psi1 psi2' - psi2 psi1'`.
    pub fn wronskian(&self, theta: f64) -> Result<f64> {
        let y = self.basis(theta)?;
        Ok(y[0] * y[3] - y[2] * y[1])
    }

    /// First angle, moving away from `theta0` in the given direction,
    /// where the assembled `psi` vanishes.
    pub fn first_zero(&self, branch: BranchSign, tol: f64) -> Option<f64> {
        let tr = match branch {
            BranchSign::Positive => self.forward.as_ref()?,
            BranchSign::Negative => self.backward.as_ref()?,
        };
        let g = |_s: f64, y: &[f64; 6]| self.combine(y).0;
        let s = tr.find_crossings(&g, tol).into_iter().next()?;
        Some(self.theta0 + branch.value() * s)
    }
}

fn solve_side(
    ode: &LinearODE,
    theta0: f64,
    extent: f64,
    direction: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<Trajectory<6>>> {
    if extent <= 0.0 {
        return Ok(None);
    }
    let cfg = IntegratorConfig {
        t_span: (0.0, extent),
        ..cfg.clone()
    };
    let rhs = |s: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let k = ode.coefficients(theta0 + direction * s)?;
        let d1 = ode.second_derivative(&k, y[0], y[1], false);
        let d2 = ode.second_derivative(&k, y[2], y[3], false);
        let dp = ode.second_derivative(&k, y[4], y[5], true);
        // y holds derivatives with respect to theta; d/ds = direction * d/dtheta
        Ok([
            direction * y[1],
            direction * d1,
            direction * y[3],
            direction * d2,
            direction * y[5],
            direction * dp,
        ])
    };
    Ok(Some(integrate(rhs, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0], &cfg)?))
}

/// Solve on whatever part of `span` the integrator reaches.
pub(crate) fn solve_linear_partial(
    ode: &LinearODE,
    theta0: f64,
    psi0: f64,
    dpsi0: f64,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<LinearSolution> {
    let (lo, hi) = span;
    if !(lo <= theta0 && theta0 <= hi) {
        return Err(Error::OutOfRange {
            what: "theta0",
            value: theta0,
            lo,
            hi,
        });
    }
    let (dlo, dhi) = ode.domain;
    let slack = 1e-12 * (1.0 + dlo.abs().max(dhi.abs()));
    if lo < dlo - slack || hi > dhi + slack {
        return Err(Error::InvalidInput(format!(
            "span [{lo}, {hi}] leaves the equation's domain [{dlo}, {dhi}]"
        )));
    }
    let forward = solve_side(ode, theta0, hi - theta0, 1.0, cfg)?;
    let backward = solve_side(ode, theta0, theta0 - lo, -1.0, cfg)?;
    let covered = (
        backward.as_ref().map_or(theta0, |tr| theta0 - tr.t_end()),
        forward.as_ref().map_or(theta0, |tr| theta0 + tr.t_end()),
    );
    Ok(LinearSolution {
        theta0,
        c1: psi0,
        c2: dpsi0,
        forward,
        backward,
        covered,
    })
}

/// Solve the linear equation on `span` from `psi(theta0) = psi0`,
/// `psi'(theta0) = dpsi0`.
pub fn solve_linear(
    ode: &LinearODE,
    theta0: f64,
    psi0: f64,
    dpsi0: f64,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<LinearSolution> {
    let sol = solve_linear_partial(ode, theta0, psi0, dpsi0, span, cfg)?;
    for tr in [&sol.forward, &sol.backward].into_iter().flatten() {
        if let Some(e) = tr.termination().to_error() {
            return Err(e);
        }
    }
    Ok(sol)
}

/// `psi = c1 + c2 theta`.
pub fn free_motion_solution(c1: f64, c2: f64, theta: f64) -> f64 {
    c1 + c2 * theta
}

/// `|rho^3 (rhoddot + w^2 rho) / psi^3 - (a psi' + b psi + c)|` at a state,
/// with `w^2` taken from `omega_sq` and `(a, b, c)` from `spec` at the
/// state's own `L = r^2 thetadot`.
pub fn compatibility_residual(omega_sq: &Expr, spec: &LinearizableSpec, s: &PolarState) -> Result<f64> {
    s.require_positive_radius()?;
    let (rho, rho_rate, rho_accel) = spec.scale_at(s.t)?;
    let w2 = omega_sq.eval_with(&|n: &str| s.lookup(n))?;
    let lhs = s.r.powi(3) * (rho_accel + w2 * rho);
    let momentum = s.angular_momentum();
    if momentum == 0.0 {
        return Err(Error::TurningPoint { theta: s.theta });
    }
    let psi = rho / s.r;
    let slope = (rho_rate * s.r - rho * s.rdot) / momentum;
    let (a, b, c) = spec.linear_terms(s.theta, momentum)?;
    Ok((lhs - (a * slope + b * psi + c)).abs())
}

/// [`compatibility_residual`] with the system's own frequency.
pub fn verify_compatibility(spec: &LinearizableSpec, s: &PolarState) -> Result<f64> {
    compatibility_residual(&spec.frequency()?, spec, s)
}

/// One row of a sampled linear equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSample {
    pub theta: f64,
    pub coefficients: Coefficients,
    pub psi: Option<f64>,
}

/// Coefficients (and `psi`, when a solution is given) on a grid of angles.
pub fn sample_linear_ode(
    ode: &LinearODE,
    grid: &[f64],
    solution: Option<&LinearSolution>,
) -> Result<Vec<LinearSample>> {
    grid.iter()
        .map(|&theta| {
            Ok(LinearSample {
                theta,
                coefficients: ode.coefficients(theta)?,
                psi: solution.map(|s| s.psi(theta)).transpose()?,
            })
        })
        .collect()
}
