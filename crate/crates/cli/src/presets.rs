//! Built-in configurations.

pub const NAMES: [&str; 3] = ["winternitz-default", "uniform-rotation", "free-motion-demo"];

const WINTERNITZ_DEFAULT: &str = r#"{
  "system": {
    "kind": "winternitz",
    "params": {"mu0": 1.0, "g1": 1.0, "g2": 0.5, "g3": 1.0}
  },
  "initial_state": {"polar": {"r": 1.0, "theta": "pi/2", "rdot": 0.0, "thetadot": 2.0}},
  "t_span": [0.0, 10.0],
  "mode": "simulate"
}"#;

// r''= r thetadot^2 - (L^2/r^4) r keeps a circular orbit turning uniformly
const UNIFORM_ROTATION: &str = r#"{
  "system": {
    "kind": "linearizable",
    "functions": {"rho": "1", "A": "0", "B": "L^2", "C": "0", "F": "0", "V": "0"}
  },
  "initial_state": {"polar": {"r": 1.0, "theta": 0.0, "rdot": 0.0, "thetadot": 1.0}},
  "t_span": [0.0, 10.0],
  "mode": "reconstruct"
}"#;

const FREE_MOTION_DEMO: &str = r#"{
  "system": {
    "kind": "free_motion",
    "functions": {"f": "u", "rho": "1"}
  },
  "initial_state": {"polar": {"r": 1.0, "theta": 0.3, "rdot": 0.4, "thetadot": 2.0}},
  "t_span": [0.0, 0.25],
  "mode": "reconstruct"
}"#;

/// The JSON text of a named preset.
pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "winternitz-default" => Some(WINTERNITZ_DEFAULT),
        "uniform-rotation" => Some(UNIFORM_ROTATION),
        "free-motion-demo" => Some(FREE_MOTION_DEMO),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn every_preset_prepares() {
        for name in NAMES {
            let cfg = RunConfig::from_json(get(name).unwrap()).unwrap();
            cfg.prepare().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(get("kepler").is_none());
    }
}
