use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::IntegratorConfig;
use crate::invariant::{h, lewis_ray_reid_polar, BranchSign};
use crate::model::linearizable::require_nonzero_scale;
use crate::model::vars::T;
use crate::model::{LinearizableSpec, PolarState, PolarSystem};
use crate::numeric::{self, QuadTolerance};

use super::{build_linear_ode, find_boundary, linear_config, solve_linear_partial, LinearODE, LinearSolution};

const THETA_STEP: f64 = 0.01;
const TIME_STEP: f64 = 0.05;
const MAX_NODES: usize = 2_000_000;

fn quad_tol() -> QuadTolerance {
    QuadTolerance { abs: 1e-15, rel: 1e-13 }
}

/// Where `psi(theta)` comes from.
#[derive(Clone, Debug)]
pub enum PsiProfile {
    Numeric(Box<LinearSolution>),
    Affine { c1: f64, c2: f64 },
}

impl PsiProfile {
    pub fn value(&self, theta: f64) -> Result<f64> {
        match self {
            PsiProfile::Numeric(sol) => sol.psi(theta),
            PsiProfile::Affine { c1, c2 } => Ok(super::free_motion_solution(*c1, *c2, theta)),
        }
    }
}

/// Cumulative tables for `Theta(theta) = sign * int_{theta0}^{theta} dl / (h psi^2)`
/// and `Tau(t) = int_{t0}^{t} dl / rho^2`, linked by `Theta - Tau = J`.
#[derive(Clone, Debug)]
pub struct QuadratureSolution {
    psi: PsiProfile,
    potential: Expr,
    invariant: f64,
    branch: BranchSign,
    scale: Expr,
    theta0: f64,
    t0: f64,
    j: f64,
    // angular progress sign * (theta - theta0) at the nodes, increasing
    progress: Vec<f64>,
    theta_cum: Vec<f64>,
    time_nodes: Vec<f64>,
    time_cum: Vec<f64>,
}

impl QuadratureSolution {
    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn branch(&self) -> BranchSign {
        self.branch
    }

    pub fn psi(&self) -> &PsiProfile {
        &self.psi
    }

    pub fn scale_at(&self, t: f64) -> Result<f64> {
        Ok(self.scale.eval_at(T, t)?)
    }

    /// Angular interval covered by the `Theta` table.
    pub fn theta_window(&self) -> (f64, f64) {
        let end = self.theta0 + self.branch.value() * self.progress.last().copied().unwrap_or(0.0);
        (self.theta0.min(end), self.theta0.max(end))
    }

    /// Time interval on which `theta(t)` can be inverted.
    pub fn time_window(&self) -> (f64, f64) {
        let reach = self.theta_cum.last().copied().unwrap_or(0.0) - self.j;
        let k = self.time_cum.partition_point(|&c| c <= reach);
        let end = if k >= self.time_cum.len() {
            *self.time_nodes.last().expect("time table is never empty")
        } else {
            // the reach falls inside segment k - 1; locate it
            self.invert_time(reach).unwrap_or(self.time_nodes[k.saturating_sub(1)])
        };
        (self.t0, end)
    }

    fn integrand(&self, theta: f64) -> Result<f64> {
        let psi = self.psi.value(theta)?;
        if !(psi > 0.0) {
            return Err(Error::PsiNonPositive { theta, psi });
        }
        Ok(1.0 / (h(theta, self.invariant, &self.potential)? * psi * psi))
    }

    fn scale_integrand(&self, t: f64) -> Result<f64> {
        let rho = self.scale_at(t)?;
        Ok(1.0 / (rho * rho))
    }

    /// `Theta(theta)`.
    pub fn theta_integral(&self, theta: f64) -> Result<f64> {
        let sign = self.branch.value();
        let u = sign * (theta - self.theta0);
        let last = *self.progress.last().expect("theta table is never empty");
        if !(u >= 0.0 && u <= last) {
            let (lo, hi) = self.theta_window();
            return Err(Error::OutOfRange {
                what: "theta",
                value: theta,
                lo,
                hi,
            });
        }
        let k = self.progress.partition_point(|&p| p <= u).saturating_sub(1);
        let node = self.theta0 + sign * self.progress[k];
        let piece = numeric::integrate(|l| self.integrand(l), node, theta, quad_tol())?;
        Ok(self.theta_cum[k] + sign * piece)
    }

    /// `Tau(t)`.
    pub fn time_integral(&self, t: f64) -> Result<f64> {
        let last = *self.time_nodes.last().expect("time table is never empty");
        if !(t >= self.t0 && t <= last) {
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                lo: self.t0,
                hi: last,
            });
        }
        let k = self.time_nodes.partition_point(|&p| p <= t).saturating_sub(1);
        let piece = numeric::integrate(|l| self.scale_integrand(l), self.time_nodes[k], t, quad_tol())?;
        Ok(self.time_cum[k] + piece)
    }

    fn invert_time(&self, target: f64) -> Result<f64> {
        let last = *self.time_cum.last().expect("time table is never empty");
        if (target - last).abs() <= table_slack(last) {
            return Ok(*self.time_nodes.last().expect("time table is never empty"));
        }
        if target.abs() <= table_slack(0.0) {
            return Ok(self.t0);
        }
        let k = self.time_cum.partition_point(|&c| c <= target);
        if k == 0 || k >= self.time_cum.len() {
            let hi = *self.time_cum.last().expect("time table is never empty");
            return Err(Error::OutOfRange {
                what: "time integral",
                value: target,
                lo: 0.0,
                hi,
            });
        }
        let (a, b) = (self.time_nodes[k - 1], self.time_nodes[k]);
        numeric::brent(|t| Ok(self.time_integral(t)? - target), a, b, 1e-15, 1e-14)
    }

    /// `theta(t)`: the angle with `Theta(theta) = Tau(t) + J`.
    pub fn theta_of_t(&self, t: f64) -> Result<f64> {
        let target = self.time_integral(t)? + self.j;
        let last = *self.theta_cum.last().unwrap_or(&0.0);
        let target = if target > last && target - last <= table_slack(last) {
            last
        } else {
            target
        };
        let k = self.theta_cum.partition_point(|&c| c <= target);
        if k == 0 || (k >= self.theta_cum.len() && target > *self.theta_cum.last().unwrap_or(&0.0)) {
            let (lo, hi) = self.time_window();
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                lo,
                hi,
            });
        }
        let k = k.min(self.theta_cum.len() - 1);
        let sign = self.branch.value();
        let (a, b) = (
            self.theta0 + sign * self.progress[k - 1],
            self.theta0 + sign * self.progress[k],
        );
        numeric::brent(|th| Ok(self.theta_integral(th)? - target), a, b, 1e-15, 1e-13)
    }

    /// `t(theta)`: the time with `Tau(t) = Theta(theta) - J`.
    pub fn t_of_theta(&self, theta: f64) -> Result<f64> {
        let target = self.theta_integral(theta)? - self.j;
        if target == 0.0 {
            return Ok(self.t0);
        }
        self.invert_time(target)
    }
}

fn table_slack(end: f64) -> f64 {
    1e-12 * (1.0 + end.abs())
}

/// Build the cumulative tables. The angular table is extended in the
/// direction of motion until it covers `Tau(t1) + J` or reaches
/// `theta_limit`, whichever comes first.
#[allow(clippy::too_many_arguments)]
pub fn time_quadrature(
    psi: PsiProfile,
    invariant: f64,
    branch: BranchSign,
    potential: &Expr,
    scale: &Expr,
    theta0: f64,
    (t0, t1): (f64, f64),
    j: f64,
    theta_limit: f64,
) -> Result<QuadratureSolution> {
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!(
            "time window [{t0}, {t1}] must be increasing"
        )));
    }
    let sign = branch.value();
    if sign * (theta_limit - theta0) < 0.0 {
        return Err(Error::InvalidInput(format!(
            "theta limit {theta_limit} lies behind theta0 = {theta0} for this branch"
        )));
    }
    require_nonzero_scale(&|t: f64| Ok(scale.eval_at(T, t)?), t0, t1)?;
    let mut q = QuadratureSolution {
        psi,
        potential: potential.clone(),
        invariant,
        branch,
        scale: scale.clone(),
        theta0,
        t0,
        j,
        progress: vec![0.0],
        theta_cum: vec![0.0],
        time_nodes: vec![t0],
        time_cum: vec![0.0],
    };

    let n = ((t1 - t0) / TIME_STEP).ceil().max(1.0) as usize;
    for k in 1..=n {
        let (a, b) = (
            q.time_nodes[k - 1],
            if k == n {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / n as f64
            },
        );
        let piece = numeric::integrate(|l| q.scale_integrand(l), a, b, quad_tol())?;
        let total = q.time_cum[k - 1] + piece;
        q.time_nodes.push(b);
        q.time_cum.push(total);
    }

    let target = q.time_cum[n] + j;
    let reach = sign * (theta_limit - theta0);
    while *q.theta_cum.last().expect("nonempty") < target {
        let u = *q.progress.last().expect("nonempty");
        if u >= reach || q.progress.len() > MAX_NODES {
            break;
        }
        let next = (u + THETA_STEP).min(reach);
        let piece = numeric::integrate(|l| q.integrand(l), theta0 + sign * u, theta0 + sign * next, quad_tol())?;
        let total = q.theta_cum.last().expect("nonempty") + sign * piece;
        q.progress.push(next);
        q.theta_cum.push(total);
    }
    Ok(q)
}

/// [`QuadratureSolution::theta_of_t`].
pub fn invert_theta_of_t(q: &QuadratureSolution, t: f64) -> Result<f64> {
    q.theta_of_t(t)
}

/// `r(theta) = rho(t(theta)) / psi(theta)`; no inversion when `rho` is
/// constant.
pub fn reconstruct_orbit(q: &QuadratureSolution, theta: f64) -> Result<f64> {
    let psi = q.psi.value(theta)?;
    if !(psi > 0.0) {
        return Err(Error::PsiNonPositive { theta, psi });
    }
    let t = if q.scale.depends_on(T) {
        q.t_of_theta(theta)?
    } else {
        q.t0
    };
    Ok(q.scale_at(t)? / psi)
}

/// `r(t) = rho(t) / psi(theta(t))`.
pub fn reconstruct_radial(q: &QuadratureSolution, t: f64) -> Result<f64> {
    let theta = q.theta_of_t(t)?;
    let psi = q.psi.value(theta)?;
    if !(psi > 0.0) {
        return Err(Error::PsiNonPositive { theta, psi });
    }
    Ok(q.scale_at(t)? / psi)
}

/// Settings for [`reconstruct`].
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub linear: IntegratorConfig,
    /// Largest angular excursion considered when no turning point bounds
    /// the motion.
    pub max_sweep: f64,
    /// Distance kept from a turning point when solving the linear equation.
    pub margin: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            linear: linear_config(),
            max_sweep: 4.0 * std::f64::consts::PI,
            margin: 1e-6,
        }
    }
}

/// Outcome of the linearized solution path for one initial state.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub invariant: f64,
    pub branch: BranchSign,
    pub ode: LinearODE,
    pub solution: LinearSolution,
    pub quadrature: QuadratureSolution,
}

impl Reconstruction {
    pub fn theta_at(&self, t: f64) -> Result<f64> {
        self.quadrature.theta_of_t(t)
    }

    pub fn r_at(&self, t: f64) -> Result<f64> {
        reconstruct_radial(&self.quadrature, t)
    }

    pub fn r_of_theta(&self, theta: f64) -> Result<f64> {
        reconstruct_orbit(&self.quadrature, theta)
    }

    pub fn psi_at(&self, theta: f64) -> Result<f64> {
        self.solution.psi(theta)
    }
}

/// `psi = rho/r` and `dpsi/dtheta = (rhodot r - rho rdot) / (r^2 thetadot)` at a state.
pub fn initial_psi(spec: &LinearizableSpec, s: &PolarState) -> Result<(f64, f64)> {
    s.require_positive_radius()?;
    let momentum = s.angular_momentum();
    if momentum == 0.0 {
        return Err(Error::TurningPoint { theta: s.theta });
    }
    let (rho, rho_rate, _) = spec.scale_at(s.t)?;
    Ok((rho / s.r, (rho_rate * s.r - rho * s.rdot) / momentum))
}

/// Solve a linearizable system from `s0` over `[s0.t, t1]` through the
/// linear equation and the time quadrature. Fails if the motion meets a
/// turning point or escapes (`psi = 0`) before `t1`.
pub fn reconstruct(
    spec: &LinearizableSpec,
    s0: &PolarState,
    t1: f64,
    opts: &PipelineOptions,
) -> Result<Reconstruction> {
    let invariant = lewis_ray_reid_polar(s0, spec.potential())?.value;
    let branch = BranchSign::from_rate(s0.thetadot, s0.theta)?;
    let sign = branch.value();
    let potential = spec.potential();

    let sweep_end = s0.theta + sign * opts.max_sweep;
    let turning = find_boundary(potential, invariant, s0.theta, sweep_end)?;
    let limit = match turning {
        Some((theta, _)) if theta == s0.theta => return Err(Error::TurningPoint { theta }),
        Some((theta, _)) => {
            let back = opts.margin.min(0.5 * (theta - s0.theta).abs());
            theta - sign * back
        }
        None => sweep_end,
    };
    let domain = (s0.theta.min(limit), s0.theta.max(limit));
    let ode = build_linear_ode(spec, invariant, branch, domain)?;

    let (psi0, dpsi0) = initial_psi(spec, s0)?;
    let solution = solve_linear_partial(&ode, s0.theta, psi0, dpsi0, domain, &opts.linear)?;
    let (lo, hi) = solution.covered();
    let mut usable = if sign > 0.0 { hi } else { lo };
    let escape = solution.first_zero(branch, 1e-13);
    if let Some(z) = escape {
        usable = z;
    }

    let quadrature = time_quadrature(
        PsiProfile::Numeric(Box::new(solution.clone())),
        invariant,
        branch,
        potential,
        spec.scale_expr(),
        s0.theta,
        (s0.t, t1),
        0.0,
        usable,
    )?;
    let (_, reached) = quadrature.time_window();
    if reached < t1 {
        return Err(match (escape, turning) {
            (Some(theta), _) => Error::PsiNonPositive { theta, psi: 0.0 },
            (None, Some((theta, _))) => Error::TurningPoint { theta },
            (None, None) => Error::OutOfRange {
                what: "t",
                value: t1,
                lo: s0.t,
                hi: reached,
            },
        });
    }
    Ok(Reconstruction {
        invariant,
        branch,
        ode,
        solution,
        quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_polar;
    use crate::parse;
    use std::f64::consts::FRAC_PI_2;

    fn p(src: &str) -> Expr {
        parse(src).unwrap()
    }

    #[test]
    fn uniform_rotation() {
        let q = time_quadrature(
            PsiProfile::Affine { c1: 1.0, c2: 0.0 },
            0.5,
            BranchSign::Positive,
            &Expr::zero(),
            &Expr::one(),
            0.3,
            (1.0, 3.0),
            0.0,
            10.0,
        )
        .unwrap();
        for k in 0..=20 {
            let t = 1.0 + 0.1 * k as f64;
            let th = invert_theta_of_t(&q, t).unwrap();
            assert!((th - (0.3 + (t - 1.0))).abs() < 1e-12);
            assert!((q.t_of_theta(th).unwrap() - t).abs() < 1e-10);
            assert!((reconstruct_radial(&q, t).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(q.theta_cum.windows(2).all(|w| w[1] > w[0]));
        assert!(q.time_cum.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn negative_branch_runs_backwards() {
        let q = time_quadrature(
            PsiProfile::Affine { c1: 1.0, c2: 0.0 },
            0.5,
            BranchSign::Negative,
            &Expr::zero(),
            &Expr::one(),
            0.0,
            (0.0, 1.0),
            0.0,
            -5.0,
        )
        .unwrap();
        assert!((q.theta_of_t(0.7).unwrap() + 0.7).abs() < 1e-12);
    }

    #[test]
    fn out_of_window_is_an_error() {
        let q = time_quadrature(
            PsiProfile::Affine { c1: 1.0, c2: 0.0 },
            0.5,
            BranchSign::Positive,
            &Expr::zero(),
            &Expr::one(),
            0.0,
            (0.0, 1.0),
            0.0,
            0.5,
        )
        .unwrap();
        assert!((q.time_window().1 - 0.5).abs() < 1e-12);
        assert!(matches!(q.theta_of_t(0.8), Err(Error::OutOfRange { .. })));
        assert!(q.theta_of_t(0.4).is_ok());
    }

    #[test]
    fn free_motion_quadrature_has_closed_form_for_constant_h() {
        // h = 1, psi = 1 + theta: Theta = 1 - 1/(1 + theta)
        let q = time_quadrature(
            PsiProfile::Affine { c1: 1.0, c2: 1.0 },
            0.5,
            BranchSign::Positive,
            &Expr::zero(),
            &Expr::one(),
            0.0,
            (0.0, 0.5),
            0.0,
            5.0,
        )
        .unwrap();
        for th in [0.1, 0.5, 0.9] {
            assert!((q.theta_integral(th).unwrap() - (1.0 - 1.0 / (1.0 + th))).abs() < 1e-13);
        }
    }

    #[test]
    fn round_trip_matches_direct_integration() {
        let spec = LinearizableSpec::new(
            p("1 + t^2/10"),
            p("sin(theta)"),
            p("L"),
            p("1"),
            Expr::zero(),
            p("0.3*sin(theta)^2"),
        )
        .unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.3,
            rdot: 0.0,
            thetadot: 2.0,
        };
        let rec = reconstruct(&spec, &s0, 2.0, &PipelineOptions::default()).unwrap();
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 2.0)).unwrap();
        for (t, y) in traj.samples() {
            assert!((rec.theta_at(t).unwrap() - y[1]).abs() < 1e-7, "theta at {t}");
            assert!((rec.r_at(t).unwrap() - y[0]).abs() < 1e-7, "r at {t}");
        }
    }

    #[test]
    fn turning_point_inside_window_is_refused() {
        let spec = LinearizableSpec::new(
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            p("sin(theta)^2"),
        )
        .unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let err = reconstruct(&spec, &s0, 10.0, &PipelineOptions::default()).unwrap_err();
        match err {
            Error::TurningPoint { theta } => assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orbit_and_radial_forms_agree() {
        let spec = crate::model::winternitz_system(&crate::model::WinternitzParams {
            mu0: 1.0,
            g1: 1.0,
            g2: 0.5,
            g3: 1.0,
        })
        .unwrap()
        .to_linearizable()
        .unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: FRAC_PI_2,
            rdot: 0.0,
            thetadot: 2.0,
        };
        let rec = reconstruct(&spec, &s0, 1.0, &PipelineOptions::default()).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let th = rec.theta_at(t).unwrap();
            assert!((rec.r_of_theta(th).unwrap() - rec.r_at(t).unwrap()).abs() < 1e-14);
        }
    }
}
