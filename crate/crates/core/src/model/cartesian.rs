use crate::error::{Error, Result};
use crate::expr::{EvalError, Expr, ExternFn, Func};
use crate::numeric::{self, QuadTolerance};

use super::vars::{self, THETA, U, V};
use super::{check_vars, CartesianState, PolarSpec};

/// The cartesian form: `xddot + w^2 x = f(y/x)/(y x^2)`,
/// `yddot + w^2 y = g(x/y)/(x y^2)`.
#[derive(Clone, Debug)]
pub struct CartesianSpec {
    f: Expr,
    g: Expr,
    omega_sq: Expr,
}

impl CartesianSpec {
    /// `f` is written in `u` (= y/x), `g` in `v` (= x/y) and the squared
    /// frequency in `t, x, y, xdot, ydot`.
    pub fn new(f: Expr, g: Expr, omega_sq: Expr) -> Result<Self> {
        check_vars(&f, &[U], "f")?;
        check_vars(&g, &[V], "g")?;
        check_vars(
            &omega_sq,
            &[vars::T, vars::X, vars::Y, vars::XDOT, vars::YDOT],
            "omega_sq",
        )?;
        Ok(CartesianSpec { f, g, omega_sq })
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn omega_sq(&self) -> &Expr {
        &self.omega_sq
    }

    /// Time derivative of `(x, y, xdot, ydot)`.
    ///
    /// Sitting on an axis is a domain error unless the coupling that would
    /// blow up there is the literal zero.
    pub fn rates(&self, s: &CartesianState) -> Result<[f64; 4]> {
        let w2 = self.omega_sq.eval_with(&|n: &str| s.lookup(n))?;
        let mut xddot = -w2 * s.x;
        let mut yddot = -w2 * s.y;
        if !self.f.is_zero_literal() {
            if s.x == 0.0 || s.y == 0.0 {
                return Err(Error::AxisCrossing { x: s.x, y: s.y });
            }
            xddot += self.f.eval_at(U, s.y / s.x)? / (s.y * s.x * s.x);
        }
        if !self.g.is_zero_literal() {
            if s.x == 0.0 || s.y == 0.0 {
                return Err(Error::AxisCrossing { x: s.x, y: s.y });
            }
            yddot += self.g.eval_at(V, s.x / s.y)? / (s.x * s.y * s.y);
        }
        Ok([s.xdot, s.ydot, xddot, yddot])
    }

    /// `U(y/x)` for this spec's couplings.
    pub fn potential_at(&self, w: f64) -> Result<f64> {
        potential_integral(&self.f, &self.g, w)
    }
}

fn cot_theta() -> Expr {
    Expr::div(Expr::cos(Expr::var(THETA)), Expr::sin(Expr::var(THETA)))
}

fn tan_theta() -> Expr {
    Expr::tan(Expr::var(THETA))
}

/// `F(theta) = (f(tan theta) + g(cot theta)) / (sin theta cos theta)`.
///
/// The second coupling is read at `cot theta = x/y`, which is what the
/// cartesian equations reduce to.
pub fn coupling_from_fg(f: &Expr, g: &Expr) -> Result<Expr> {
    if f.is_zero_literal() && g.is_zero_literal() {
        return Ok(Expr::zero());
    }
    let f_theta = f.substitute(U, &tan_theta())?;
    let g_theta = g.substitute(V, &cot_theta())?;
    let den = Expr::mul(Expr::sin(Expr::var(THETA)), Expr::cos(Expr::var(THETA)));
    Ok(Expr::div(Expr::add(f_theta, g_theta), den).simplify())
}

fn eval_err(e: Error) -> EvalError {
    match e {
        Error::Eval(inner) => inner,
        other => EvalError::External {
            name: "U".into(),
            message: other.to_string(),
        },
    }
}

/// `U(w) = int_b^w f + int_b^{1/w} g` by adaptive quadrature.
///
/// The base point `b` is `1` for `w > 0`, so `U(1) = 0`; on the negative
/// branch it is `-1`. `w = 0` lies on an axis and is rejected.
pub fn potential_integral(f: &Expr, g: &Expr, w: f64) -> Result<f64> {
    if w == 0.0 || !w.is_finite() {
        return Err(Error::Eval(EvalError::Domain { op: "U", value: w }));
    }
    let base = w.signum();
    let tol = QuadTolerance { abs: 1e-14, rel: 1e-13 };
    let mut total = 0.0;
    if !f.is_zero_literal() {
        total += numeric::integrate(|l| Ok(f.eval_at(U, l)?), base, w, tol)?;
    }
    if !g.is_zero_literal() {
        total += numeric::integrate(|l| Ok(g.eval_at(V, l)?), base, 1.0 / w, tol)?;
    }
    Ok(total)
}

/// `V(theta) = U(tan theta)` as an expression node.
///
/// The value comes from [`potential_integral`]; the derivative is exact,
/// `f(tan theta)/cos^2 theta - g(cot theta)/sin^2 theta`.
pub fn potential_from_fg(f: &Expr, g: &Expr) -> Result<Expr> {
    if f.is_zero_literal() && g.is_zero_literal() {
        return Ok(Expr::zero());
    }
    let slope = Expr::sub(
        Expr::div(
            f.substitute(U, &tan_theta())?,
            Expr::powi(Expr::cos(Expr::var(THETA)), 2),
        ),
        Expr::div(
            g.substitute(V, &cot_theta())?,
            Expr::powi(Expr::sin(Expr::var(THETA)), 2),
        ),
    )
    .simplify();
    let (f, g) = (f.clone(), g.clone());
    let node = ExternFn::new(
        "U_tan",
        THETA,
        move |theta: f64| potential_integral(&f, &g, theta.tan()).map_err(eval_err),
        slope,
    );
    Ok(Expr::extern_fn(node))
}

/// Polar form of a cartesian spec.
pub fn polar_from_cartesian(spec: &CartesianSpec) -> Result<PolarSpec> {
    let coupling = coupling_from_fg(&spec.f, &spec.g)?;
    let potential = potential_from_fg(&spec.f, &spec.g)?;
    let r = Expr::var(vars::R);
    let th = Expr::var(THETA);
    let rdot = Expr::var(vars::RDOT);
    let thd = Expr::var(vars::THETADOT);
    let cos = Expr::call(Func::Cos, th.clone());
    let sin = Expr::call(Func::Sin, th);
    let x = Expr::mul(r.clone(), cos.clone());
    let y = Expr::mul(r.clone(), sin.clone());
    let xdot = Expr::sub(
        Expr::mul(rdot.clone(), cos.clone()),
        Expr::mul(Expr::mul(r.clone(), thd.clone()), sin.clone()),
    );
    let ydot = Expr::add(Expr::mul(rdot, sin), Expr::mul(Expr::mul(r, thd), cos));
    let omega_sq = spec
        .omega_sq
        .substitute(vars::X, &x)?
        .substitute(vars::Y, &y)?
        .substitute(vars::XDOT, &xdot)?
        .substitute(vars::YDOT, &ydot)?
        .simplify();
    PolarSpec::new(coupling, potential, omega_sq)
}
