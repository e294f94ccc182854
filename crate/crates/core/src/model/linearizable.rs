use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{self, QuadTolerance};

use super::vars::{L, R, RDOT, T, THETA, THETADOT, U, V};
use super::{check_vars, coupling_term, potential_from_fg, CartesianSpec, PolarState, PolarSystem};

/// The six-function family
/// `rddot - r thetadot^2 + w^2 r = F/r^3` with
/// `w^2 = -rhoddot/rho + (rho rdot - rhodot r) A/(rho r^3) + B/r^4 + C/(rho r^3)`,
/// where `A, B, C` are functions of `theta` and `L = r^2 thetadot`.
#[derive(Clone, Debug)]
pub struct LinearizableSpec {
    scale: Expr,
    scale_rate: Expr,
    scale_accel: Expr,
    velocity_term: Expr,
    quartic_term: Expr,
    cubic_term: Expr,
    coupling: Expr,
    potential: Expr,
    potential_slope: Expr,
}

impl LinearizableSpec {
    /// `scale` is `rho(t)`; `velocity_term`, `quartic_term` and `cubic_term`
    /// are `A`, `B`, `C`; `coupling` is `F` and `potential` is `V`.
    pub fn new(
        scale: Expr,
        velocity_term: Expr,
        quartic_term: Expr,
        cubic_term: Expr,
        coupling: Expr,
        potential: Expr,
    ) -> Result<Self> {
        check_vars(&scale, &[T], "rho")?;
        check_vars(&velocity_term, &[THETA, L], "A")?;
        check_vars(&quartic_term, &[THETA, L], "B")?;
        check_vars(&cubic_term, &[THETA, L], "C")?;
        check_vars(&coupling, &[THETA], "F")?;
        check_vars(&potential, &[THETA], "V")?;
        let scale_rate = scale.derivative(T);
        let scale_accel = scale_rate.derivative(T);
        let potential_slope = potential.derivative(THETA);
        Ok(LinearizableSpec {
            scale,
            scale_rate,
            scale_accel,
            velocity_term,
            quartic_term,
            cubic_term,
            coupling,
            potential,
            potential_slope,
        })
    }

    pub fn velocity_term(&self) -> &Expr {
        &self.velocity_term
    }

    pub fn quartic_term(&self) -> &Expr {
        &self.quartic_term
    }

    pub fn cubic_term(&self) -> &Expr {
        &self.cubic_term
    }

    pub fn scale_expr(&self) -> &Expr {
        &self.scale
    }

    /// `rho` is free of `t`.
    pub fn has_constant_scale(&self) -> bool {
        !self.scale.depends_on(T)
    }

    /// `(rho, rhodot, rhoddot)` at `t`; a vanishing `rho` is an error.
    pub fn scale_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let rho = self.scale.eval_at(T, t)?;
        if rho == 0.0 {
            return Err(Error::ScaleZero { t });
        }
        Ok((rho, self.scale_rate.eval_at(T, t)?, self.scale_accel.eval_at(T, t)?))
    }

    /// `(A, B, C)` at `theta` and `L`.
    pub fn terms_at(&self, theta: f64, momentum: f64) -> Result<(f64, f64, f64)> {
        let lookup = |n: &str| match n {
            THETA => Some(theta),
            L => Some(momentum),
            _ => None,
        };
        Ok((
            self.velocity_term.eval_with(&lookup)?,
            self.quartic_term.eval_with(&lookup)?,
            self.cubic_term.eval_with(&lookup)?,
        ))
    }

    /// Coefficients `(a, b, c)` of the compatibility condition at `theta`
    /// for the on-shell momentum `L`: `a = -L A`, `b = B`, `c = C`.
    pub fn linear_terms(&self, theta: f64, momentum: f64) -> Result<(f64, f64, f64)> {
        let (a, b, c) = self.terms_at(theta, momentum)?;
        Ok((-momentum * a, b, c))
    }

    /// Squared frequency at a state.
    pub fn frequency_at(&self, s: &PolarState) -> Result<f64> {
        let (rho, rho_rate, rho_accel) = self.scale_at(s.t)?;
        let (a, b, c) = self.terms_at(s.theta, s.angular_momentum())?;
        let r3 = s.r.powi(3);
        Ok(-rho_accel / rho + (rho * s.rdot - rho_rate * s.r) * a / (rho * r3) + b / (r3 * s.r) + c / (rho * r3))
    }

    /// The squared frequency as an expression in `t, r, theta, rdot, thetadot`.
    pub fn frequency(&self) -> Result<Expr> {
        let rho = self.scale.clone();
        let r = Expr::var(R);
        let r3 = Expr::powi(r.clone(), 3);
        let momentum = Expr::mul(Expr::powi(r.clone(), 2), Expr::var(THETADOT));
        let on_shell = |e: &Expr| e.substitute(L, &momentum);
        let velocity = Expr::sub(
            Expr::mul(rho.clone(), Expr::var(RDOT)),
            Expr::mul(self.scale_rate.clone(), r.clone()),
        );
        let w2 = Expr::add(
            Expr::add(
                Expr::neg(Expr::div(self.scale_accel.clone(), rho.clone())),
                Expr::div(
                    Expr::mul(velocity, on_shell(&self.velocity_term)?),
                    Expr::mul(rho.clone(), r3.clone()),
                ),
            ),
            Expr::add(
                Expr::div(on_shell(&self.quartic_term)?, Expr::powi(r, 4)),
                Expr::div(on_shell(&self.cubic_term)?, Expr::mul(rho, r3)),
            ),
        );
        Ok(w2.simplify())
    }
}

impl PolarSystem for LinearizableSpec {
    fn potential(&self) -> &Expr {
        &self.potential
    }

    fn potential_slope(&self) -> &Expr {
        &self.potential_slope
    }

    fn coupling(&self) -> &Expr {
        &self.coupling
    }

    fn scale(&self) -> Option<&Expr> {
        Some(&self.scale)
    }

    fn radial_accel(&self, s: &PolarState) -> Result<f64> {
        let w2 = self.frequency_at(s)?;
        Ok(s.r * s.thetadot * s.thetadot - w2 * s.r + coupling_term(&self.coupling, s)?)
    }
}

/// The class whose linear equation reduces to `psi'' = 0`, together with
/// its cartesian form.
#[derive(Clone, Debug)]
pub struct FreeMotionSystem {
    pub linearizable: LinearizableSpec,
    pub cartesian: CartesianSpec,
}

/// Build the free-motion class from the coupling `f(u)` and the scale
/// `rho(t)`. The second coupling is `g(v) = -f(1/v)`, which makes `F`
/// vanish identically; `A = V'/L`, `B = L^2`, `C = 0`.
pub fn free_motion_system(f: &Expr, rho: &Expr) -> Result<FreeMotionSystem> {
    check_vars(f, &[U], "f")?;
    check_vars(rho, &[T], "rho")?;
    let g = if f.is_zero_literal() {
        Expr::zero()
    } else {
        Expr::neg(f.substitute(U, &Expr::div(Expr::one(), Expr::var(V)))?)
    };
    let potential = potential_from_fg(f, &g)?;
    let slope = potential.derivative(THETA);
    let momentum = Expr::var(L);
    let velocity_term = if slope.is_zero_literal() {
        Expr::zero()
    } else {
        Expr::div(slope, momentum.clone())
    };
    let linearizable = LinearizableSpec::new(
        rho.clone(),
        velocity_term,
        Expr::powi(momentum, 2),
        Expr::zero(),
        Expr::zero(),
        potential,
    )?;
    let cartesian = CartesianSpec::new(f.clone(), g, free_motion_cartesian_frequency(f, rho)?)?;
    Ok(FreeMotionSystem {
        linearizable,
        cartesian,
    })
}

/// `w^2 = -rhoddot/rho + ((x ydot - y xdot)/(x^2 + y^2))^2
///        + ((rho xdot - rhodot x) x + (rho ydot - rhodot y) y) f(y/x) / (rho x^2 y^2 (x ydot - y xdot))`.
fn free_motion_cartesian_frequency(f: &Expr, rho: &Expr) -> Result<Expr> {
    use super::vars::{X, XDOT, Y, YDOT};
    let (x, y, xd, yd) = (Expr::var(X), Expr::var(Y), Expr::var(XDOT), Expr::var(YDOT));
    let rho_rate = rho.derivative(T);
    let rho_accel = rho_rate.derivative(T);
    let cross = Expr::sub(Expr::mul(x.clone(), yd.clone()), Expr::mul(y.clone(), xd.clone()));
    let r2 = Expr::add(Expr::powi(x.clone(), 2), Expr::powi(y.clone(), 2));
    let mut w2 = Expr::add(
        Expr::neg(Expr::div(rho_accel, rho.clone())),
        Expr::powi(Expr::div(cross.clone(), r2), 2),
    );
    if !f.is_zero_literal() {
        let num = Expr::add(
            Expr::mul(
                Expr::sub(Expr::mul(rho.clone(), xd), Expr::mul(rho_rate.clone(), x.clone())),
                x.clone(),
            ),
            Expr::mul(
                Expr::sub(Expr::mul(rho.clone(), yd), Expr::mul(rho_rate, y.clone())),
                y.clone(),
            ),
        );
        let den = Expr::mul(
            Expr::mul(
                rho.clone(),
                Expr::mul(Expr::powi(x.clone(), 2), Expr::powi(y.clone(), 2)),
            ),
            cross,
        );
        let f_ratio = f.substitute(U, &Expr::div(y, x))?;
        w2 = Expr::add(w2, Expr::mul(Expr::div(num, den), f_ratio));
    }
    Ok(w2.simplify())
}

/// Autonomous form of a six-function system after the rescaling
/// `rbar = r/rho`, `dtbar = dt/rho^2`:
/// `rbar'' = rbar thetabar'^2 - (A rbar' + B/rbar + C)/rbar^2 + F/rbar^3`.
#[derive(Clone, Debug)]
pub struct BarredSystem {
    spec: LinearizableSpec,
}

impl BarredSystem {
    pub fn new(spec: &LinearizableSpec) -> Self {
        BarredSystem { spec: spec.clone() }
    }
}

impl PolarSystem for BarredSystem {
    fn potential(&self) -> &Expr {
        &self.spec.potential
    }

    fn potential_slope(&self) -> &Expr {
        &self.spec.potential_slope
    }

    fn coupling(&self) -> &Expr {
        &self.spec.coupling
    }

    fn radial_accel(&self, s: &PolarState) -> Result<f64> {
        let (a, b, c) = self.spec.terms_at(s.theta, s.angular_momentum())?;
        let r2 = s.r * s.r;
        Ok(s.r * s.thetadot * s.thetadot - (a * s.rdot + b / s.r + c) / r2 + coupling_term(&self.spec.coupling, s)?)
    }
}

/// Map a state to the barred variables: `rbar = r/rho`, `tbar = int_{t0}^t dl/rho^2`,
/// `rbar' = rho rdot - rhodot r`, `thetabar' = rho^2 thetadot`. The returned
/// state carries `tbar` in its time field.
pub fn quasi_invariance_map(rho: &Expr, s: &PolarState, t0: f64) -> Result<PolarState> {
    check_vars(rho, &[T], "rho")?;
    let rho_at = |t: f64| -> Result<f64> { Ok(rho.eval_at(T, t)?) };
    require_nonzero_scale(&rho_at, t0, s.t)?;
    let tbar = numeric::integrate(
        |l| {
            let v = rho_at(l)?;
            Ok(1.0 / (v * v))
        },
        t0,
        s.t,
        QuadTolerance::default(),
    )?;
    let value = rho_at(s.t)?;
    let rate = rho.derivative(T).eval_at(T, s.t)?;
    Ok(PolarState {
        t: tbar,
        r: s.r / value,
        theta: s.theta,
        rdot: value * s.rdot - rate * s.r,
        thetadot: value * value * s.thetadot,
    })
}

/// Sample `rho` on `[a, b]` and fail at the first sign change or zero.
pub(crate) fn require_nonzero_scale<F>(rho_at: &F, a: f64, b: f64) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
{
    const SAMPLES: usize = 256;
    let first = rho_at(a)?;
    if first == 0.0 {
        return Err(Error::ScaleZero { t: a });
    }
    for k in 1..=SAMPLES {
        let t = a + (b - a) * k as f64 / SAMPLES as f64;
        let v = rho_at(t)?;
        if v == 0.0 || v.signum() != first.signum() {
            return Err(Error::ScaleZero { t });
        }
    }
    Ok(())
}
