use crate::error::Result;
use crate::model::{CartesianSpec, CartesianState};

use super::{integrate_with_events, EventFn, EventKind, IntegratorConfig, Trajectory};

/// Integrate a cartesian system over `cfg.t_span`. A run with a non-zero
/// coupling stops where it reaches an axis.
pub fn integrate_cartesian(spec: &CartesianSpec, s0: &CartesianState, cfg: &IntegratorConfig) -> Result<Trajectory<4>> {
    let mut events = Vec::new();
    if !(spec.f().is_zero_literal() && spec.g().is_zero_literal()) {
        events.push(EventFn::new(EventKind::AxisCrossing, true, |_t, y: &[f64; 4]| {
            y[0] * y[1]
        }));
    }
    let rhs = |t: f64, y: &[f64; 4]| spec.rates(&CartesianState::from_array(t, y));
    integrate_with_events(rhs, s0.to_array(), cfg, &events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Termination;
    use crate::parse;
    use crate::Expr;

    #[test]
    fn isotropic_oscillator_returns_after_a_period() {
        let spec = CartesianSpec::new(Expr::zero(), Expr::zero(), Expr::one()).unwrap();
        let s0 = CartesianState {
            t: 0.0,
            x: 1.0,
            y: 0.0,
            xdot: 0.0,
            ydot: 0.5,
        };
        let traj = integrate_cartesian(&spec, &s0, &IntegratorConfig::over(0.0, 2.0 * std::f64::consts::PI)).unwrap();
        assert!(traj.termination().is_completed());
        let end = traj.last_state();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8);
    }

    #[test]
    fn coupled_run_stops_on_an_axis() {
        let spec = CartesianSpec::new(parse("1e-3/u^2").unwrap(), Expr::zero(), Expr::zero()).unwrap();
        let s0 = CartesianState {
            t: 0.0,
            x: 1.0,
            y: 1.0,
            xdot: -1.0,
            ydot: 0.0,
        };
        let traj = integrate_cartesian(&spec, &s0, &IntegratorConfig::over(0.0, 3.0)).unwrap();
        assert!(matches!(
            traj.termination(),
            Termination::Event {
                kind: EventKind::AxisCrossing,
                ..
            }
        ));
        assert!(traj.last_state()[0].abs() < 1e-6);
    }
}
