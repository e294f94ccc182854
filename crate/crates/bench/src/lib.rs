//! Shared fixtures for the benchmarks.

use ermakov_core::model::winternitz_system;
use ermakov_core::{parse, Expr, IntegratorConfig, KeplerErmakovSpec, LinearizableSpec, PolarState, WinternitzParams};

pub fn winternitz_params() -> WinternitzParams {
    WinternitzParams {
        mu0: 1.0,
        g1: 1.0,
        g2: 0.5,
        g3: 1.0,
    }
}

pub fn winternitz() -> KeplerErmakovSpec {
    winternitz_system(&winternitz_params()).expect("valid parameters")
}

pub fn winternitz_linear() -> LinearizableSpec {
    winternitz().to_linearizable().expect("kepler systems linearize")
}

/// Off-axis start on a bound orbit.
pub fn winternitz_start() -> PolarState {
    PolarState {
        t: 0.0,
        r: 1.0,
        theta: 0.3,
        rdot: 0.0,
        thetadot: 2.0,
    }
}

pub fn integrator(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_span: (0.0, t_end),
        ..IntegratorConfig::default()
    }
}

/// A potential with a few nested transcendental terms.
pub fn sample_expr() -> Expr {
    parse("0.5*sin(theta)^2/(1 + 0.3*cos(2*theta)) + exp(-theta^2)*sqrt(1 + theta^2)").expect("parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        winternitz_linear();
        assert!(sample_expr().eval_at("theta", 0.4).unwrap().is_finite());
    }
}
