use crate::error::Result;
use crate::expr::Expr;
use crate::invariant::lewis_ray_reid_polar;
use crate::model::vars::T;
use crate::model::{PolarState, PolarSystem};

use super::{integrate_with_events, EventFn, EventKind, EventRecord, IntegratorConfig, Trajectory};

/// Relative invariant drift `|I(t) - I(t0)| / (1 + |I(t0)|)` along a run.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftStats {
    pub initial: f64,
    pub max: f64,
    pub rms: f64,
    pub series: Vec<f64>,
}

/// Integrate a polar system from `s0` over `cfg.t_span`, stopping at radial
/// collapse, at axes where `F` is singular, and where the scale function
/// vanishes. The invariant drift is attached to the result.
///
/// The start time of `cfg.t_span` overrides `s0.t`.
pub fn integrate_polar<S>(system: &S, s0: &PolarState, cfg: &IntegratorConfig) -> Result<Trajectory<4>>
where
    S: PolarSystem + ?Sized,
{
    s0.require_positive_radius()?;
    let floor = cfg.radial_floor;
    let mut events = vec![EventFn::new(
        EventKind::RadialCollapse,
        true,
        move |_t, y: &[f64; 4]| y[0] - floor,
    )];
    if let Some(axes) = singular_axes(system.coupling()) {
        events.push(EventFn::new(EventKind::AxisCrossing, true, move |_t, y: &[f64; 4]| {
            axes.distance(y[1])
        }));
    }
    if let Some(rho) = system.scale() {
        if rho.depends_on(T) {
            let rho = rho.clone();
            events.push(EventFn::new(EventKind::ScaleZero, true, move |t, _y: &[f64; 4]| {
                rho.eval_at(T, t).unwrap_or(0.0)
            }));
        }
    }
    let rhs = |t: f64, y: &[f64; 4]| system.rates(&PolarState::from_array(t, y));
    let mut traj = integrate_with_events(rhs, s0.to_array(), cfg, &events)?;
    let drift = monitor_invariant(&traj, system.potential())?;
    traj.set_invariant_drift(drift);
    Ok(traj)
}

/// Which coordinate axes the coupling `F(theta)` blows up on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularAxes {
    /// `y = 0`, i.e. `theta` a multiple of `pi`.
    pub horizontal: bool,
    /// `x = 0`, i.e. `theta` an odd multiple of `pi/2`.
    pub vertical: bool,
}

impl SingularAxes {
    /// Signed quantity vanishing exactly on the watched axes.
    pub fn distance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let g = match (self.horizontal, self.vertical) {
            (true, true) => s * c,
            (true, false) => s,
            _ => c,
        };
        if g.abs() < 1e-15 {
            0.0
        } else {
            g
        }
    }
}

fn singular_at(coupling: &Expr, axis: f64) -> bool {
    let at = |th: f64| {
        coupling
            .eval_at(crate::model::vars::THETA, th)
            .ok()
            .filter(|v| v.is_finite())
    };
    match at(axis) {
        None => true,
        Some(v) => {
            let near = [axis - 0.01, axis + 0.01]
                .iter()
                .filter_map(|&th| at(th))
                .fold(0.0f64, |m, x| m.max(x.abs()));
            v.abs() > 1e8 * near && v != 0.0
        }
    }
}

/// Axes on which `F` cannot be evaluated or is unbounded; `None` when it is
/// regular on both.
pub fn singular_axes(coupling: &Expr) -> Option<SingularAxes> {
    use std::f64::consts::{FRAC_PI_2, PI};
    if coupling.is_zero_literal() {
        return None;
    }
    let axes = SingularAxes {
        horizontal: singular_at(coupling, 0.0) || singular_at(coupling, PI),
        vertical: singular_at(coupling, FRAC_PI_2) || singular_at(coupling, -FRAC_PI_2),
    };
    (axes.horizontal || axes.vertical).then_some(axes)
}

/// Drift statistics of the invariant over the samples of a polar run.
pub fn monitor_invariant(traj: &Trajectory<4>, potential: &Expr) -> Result<DriftStats> {
    drift_of_states(&polar_samples(traj), potential)
}

/// Drift statistics over an arbitrary sequence of states.
pub fn drift_of_states(states: &[PolarState], potential: &Expr) -> Result<DriftStats> {
    if states.is_empty() {
        return Err(crate::error::Error::InvalidInput("no states to monitor".into()));
    }
    let values = states
        .iter()
        .map(|s| lewis_ray_reid_polar(s, potential).map(|i| i.value))
        .collect::<Result<Vec<f64>>>()?;
    let initial = values[0];
    let series: Vec<f64> = values
        .iter()
        .map(|i| (i - initial).abs() / (1.0 + initial.abs()))
        .collect();
    let max = series.iter().copied().fold(0.0, f64::max);
    let rms = (series.iter().map(|d| d * d).sum::<f64>() / series.len() as f64).sqrt();
    Ok(DriftStats {
        initial,
        max,
        rms,
        series,
    })
}

/// Sign changes of `thetadot`, close approaches to the origin, crossings
/// of axes where `F` is singular and zeros of the scale,
/// located on the dense output.
pub fn detect_events<S>(traj: &Trajectory<4>, system: &S, cfg: &IntegratorConfig) -> Vec<EventRecord<4>>
where
    S: PolarSystem + ?Sized,
{
    let tol = cfg.event_time_tol;
    let mut out = Vec::new();
    let mut push = |kind: EventKind, times: Vec<f64>| {
        for t in times {
            if let Some(state) = traj.eval(t) {
                out.push(EventRecord { kind, t, state });
            }
        }
    };
    push(EventKind::TurningPoint, traj.find_crossings(&|_t, y| y[3], tol));
    let floor = cfg.radial_floor;
    push(
        EventKind::RadialCollapse,
        traj.find_crossings(&|_t, y| y[0] - floor, tol),
    );
    if let Some(axes) = singular_axes(system.coupling()) {
        push(
            EventKind::AxisCrossing,
            traj.find_crossings(&|_t, y| axes.distance(y[1]), tol),
        );
    }
    if let Some(rho) = system.scale() {
        if rho.depends_on(T) {
            push(
                EventKind::ScaleZero,
                traj.find_crossings(&|t, _y| rho.eval_at(T, t).unwrap_or(0.0), tol),
            );
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    out
}

/// The samples of a polar run as states.
pub fn polar_samples(traj: &Trajectory<4>) -> Vec<PolarState> {
    traj.samples().map(|(t, y)| PolarState::from_array(t, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Termination;
    use crate::model::{winternitz_system, KeplerErmakovSpec, PolarSpec, WinternitzParams};
    use crate::parse;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn circular_oscillator_orbit_has_no_events_and_no_drift() {
        let spec = PolarSpec::new(Expr::zero(), Expr::zero(), Expr::one()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let cfg = IntegratorConfig::over(0.0, 2.0 * PI);
        let traj = integrate_polar(&spec, &s0, &cfg).unwrap();
        assert!(traj.termination().is_completed());
        assert!(detect_events(&traj, &spec, &cfg).is_empty());
        assert!(traj.invariant_drift().unwrap().max < 1e-14);
        for (_, y) in traj.samples() {
            assert!((y[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kepler_circular_orbit() {
        let spec = KeplerErmakovSpec::new(Expr::zero(), Expr::one(), Expr::zero()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 2.0 * PI)).unwrap();
        for (_, y) in traj.samples() {
            assert!((y[0] - 1.0).abs() < 1e-8);
        }
        assert!((traj.last_state()[1] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn winternitz_conserves_invariant_and_hamiltonian() {
        let p = WinternitzParams {
            mu0: 1.0,
            g1: 1.0,
            g2: 0.5,
            g3: 1.0,
        };
        let spec = winternitz_system(&p).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: FRAC_PI_2,
            rdot: 0.0,
            thetadot: 2.0,
        };
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 10.0)).unwrap();
        assert!(traj.termination().is_completed(), "{:?}", traj.termination());
        assert!(traj.invariant_drift().unwrap().max <= 1e-6);
        let h0 = crate::model::winternitz_hamiltonian(&p, &s0).unwrap();
        for s in polar_samples(&traj) {
            let h = crate::model::winternitz_hamiltonian(&p, &s).unwrap();
            assert!((h - h0).abs() <= 1e-6 * (1.0 + h0.abs()));
        }
    }

    #[test]
    fn turning_points_sit_where_potential_meets_invariant() {
        let v = parse("sin(theta)^2").unwrap();
        let spec = PolarSpec::new(Expr::zero(), v.clone(), Expr::one()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let cfg = IntegratorConfig::over(0.0, 10.0);
        let traj = integrate_polar(&spec, &s0, &cfg).unwrap();
        let events = detect_events(&traj, &spec, &cfg);
        assert!(events.len() >= 2);
        for e in &events {
            assert_eq!(e.kind, EventKind::TurningPoint);
            // I = 1/2, so turning points are at theta = +-pi/4
            assert!((e.state[1].abs() - FRAC_PI_4).abs() < 1e-8, "{}", e.state[1]);
        }
    }

    #[test]
    fn infall_is_stopped() {
        let spec = KeplerErmakovSpec::new(Expr::zero(), Expr::one(), Expr::zero()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 0.0,
        };
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 5.0)).unwrap();
        assert!(matches!(
            traj.termination(),
            Termination::Event {
                kind: EventKind::RadialCollapse,
                ..
            } | Termination::StepSizeUnderflow { .. }
                | Termination::RhsFailure { .. }
        ));
        assert!(traj.t_end() < 5.0);
    }

    #[test]
    fn singular_axes_are_classified() {
        assert_eq!(singular_axes(&Expr::zero()), None);
        assert_eq!(singular_axes(&parse("2 + cos(theta)").unwrap()), None);
        let w = singular_axes(&parse("2*((1 + 0.5*cos(theta))/sin(theta)^2 + 1)").unwrap()).unwrap();
        assert!(w.horizontal && !w.vertical);
        let c = singular_axes(&parse("0.01/cos(theta)^2").unwrap()).unwrap();
        assert!(!c.horizontal && c.vertical);
        let both = singular_axes(&parse("1/(sin(theta)*cos(theta))^2").unwrap()).unwrap();
        assert!(both.horizontal && both.vertical);
        assert_eq!(w.distance(FRAC_PI_2), 1.0);
        assert_eq!(c.distance(FRAC_PI_2), 0.0);
    }

    #[test]
    fn axis_crossing_stops_coupled_runs() {
        // singular on x = 0 but too weak to act as a barrier
        let spec = PolarSpec::new(parse("1e-30/cos(theta)^2").unwrap(), Expr::zero(), Expr::zero()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.5,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 5.0)).unwrap();
        assert!(matches!(
            traj.termination(),
            Termination::Event {
                kind: EventKind::AxisCrossing,
                ..
            }
        ));
        assert!((traj.last_state()[1] - FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn corrupted_sample_is_detected() {
        let spec = PolarSpec::new(Expr::zero(), Expr::zero(), Expr::one()).unwrap();
        let s0 = PolarState {
            t: 0.0,
            r: 1.0,
            theta: 0.0,
            rdot: 0.0,
            thetadot: 1.0,
        };
        let traj = integrate_polar(&spec, &s0, &IntegratorConfig::over(0.0, 1.0)).unwrap();
        let mut samples = polar_samples(&traj);
        let k = samples.len() / 2;
        assert!(drift_of_states(&samples, &Expr::zero()).unwrap().max < 1e-12);
        samples[k].thetadot += 1e-3;
        assert!(drift_of_states(&samples, &Expr::zero()).unwrap().max >= 1e-4);
    }
}
