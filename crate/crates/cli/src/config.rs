//! Run configuration: the JSON schema and its validation into ready-to-run
//! models.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use ermakov_core::model::vars::{self, L, R, RDOT, T, THETA, THETADOT, U, V, X, XDOT, Y, YDOT};
use ermakov_core::model::{
    check_vars, free_motion_system, polar_from_cartesian, winternitz_system, KeplerErmakovSpec, LinearizableSpec,
    PolarSpec,
};
use ermakov_core::{
    parse, CartesianSpec, CartesianState, Expr, IntegratorConfig, PolarState, PolarSystem, WinternitzParams,
};
use serde::{Deserialize, Serialize};

/// A problem with a configuration, located by its field path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cartesian,
    Polar,
    Linearizable,
    Kepler,
    Winternitz,
    FreeMotion,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Cartesian => "cartesian",
            Kind::Polar => "polar",
            Kind::Linearizable => "linearizable",
            Kind::Kepler => "kepler",
            Kind::Winternitz => "winternitz",
            Kind::FreeMotion => "free_motion",
        }
    }

    /// Function names with the variables each may read, and whether it
    /// must be given.
    fn functions(self) -> &'static [(&'static str, &'static [&'static str], bool)] {
        const POLAR_RATES: &[&str] = &[T, R, THETA, RDOT, THETADOT];
        match self {
            Kind::Cartesian => &[
                ("f", &[U], true),
                ("g", &[V], true),
                ("omega_sq", &[T, X, Y, XDOT, YDOT], true),
            ],
            Kind::Polar => &[
                ("F", &[THETA], true),
                ("V", &[THETA], true),
                ("omega_sq", POLAR_RATES, true),
            ],
            Kind::Linearizable => &[
                ("rho", &[T], true),
                ("A", &[THETA, L], true),
                ("B", &[THETA, L], true),
                ("C", &[THETA, L], true),
                ("F", &[THETA], true),
                ("V", &[THETA], true),
                ("omega_sq", POLAR_RATES, false),
            ],
            Kind::Kepler => &[("F", &[THETA], true), ("G", &[THETA], true), ("V", &[THETA], true)],
            Kind::Winternitz => &[],
            Kind::FreeMotion => &[("f", &[U], true), ("rho", &[T], true)],
        }
    }

    pub fn is_linearizable(self) -> bool {
        matches!(
            self,
            Kind::Linearizable | Kind::Kepler | Kind::Winternitz | Kind::FreeMotion
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Linearize,
    Reconstruct,
    Validate,
}

/// A number, or an expression in the named parameters (and `pi`).
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub kind: Kind,
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarInit {
    pub r: Scalar,
    pub theta: Scalar,
    pub rdot: Scalar,
    pub thetadot: Scalar,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianInit {
    pub x: Scalar,
    pub y: Scalar,
    pub xdot: Scalar,
    pub ydot: Scalar,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Polar(PolarInit),
    Cartesian(CartesianInit),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rel")]
    pub rel: f64,
    #[serde(default = "default_abs")]
    pub abs: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn default_rel() -> f64 {
    1e-9
}

fn default_abs() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: default_rel(),
            abs: default_abs(),
            max_step: None,
            max_steps: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Pass/fail bars for `validate`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_drift")]
    pub drift: f64,
    #[serde(default = "default_round_trip")]
    pub round_trip: f64,
    #[serde(default = "default_compatibility")]
    pub compatibility: f64,
}

fn default_drift() -> f64 {
    1e-6
}

fn default_round_trip() -> f64 {
    1e-5
}

fn default_compatibility() -> f64 {
    1e-8
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            drift: default_drift(),
            round_trip: default_round_trip(),
            compatibility: default_compatibility(),
        }
    }
}

/// The JSON run configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    pub initial_state: InitialState,
    pub t_span: [Scalar; 2],
    #[serde(default)]
    pub theta_span: Option<[Scalar; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Rows in the sampled CSV outputs.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

pub const DEFAULT_SAMPLES: usize = 201;

impl RunConfig {
    /// Parse JSON, reporting the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner().to_string())
        })
    }
}

/// Everything a command needs, checked and evaluated.
pub struct Prepared {
    pub kind: Kind,
    /// The system integrated directly.
    pub direct: Box<dyn PolarSystem>,
    /// The six-function form, for the linearizable kinds.
    pub linear: Option<LinearizableSpec>,
    /// The frequency to test compatibility against, when one was given
    /// independently of the six functions.
    pub omega_sq: Option<Expr>,
    pub state: PolarState,
    pub t_span: (f64, f64),
    pub theta_span: Option<(f64, f64)>,
    pub integrator: IntegratorConfig,
    pub samples: usize,
    pub thresholds: Thresholds,
    pub out_dir: Option<PathBuf>,
    pub mode: Option<Mode>,
}

impl fmt::Debug for Prepared {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prepared")
            .field("kind", &self.kind)
            .field("state", &self.state)
            .field("t_span", &self.t_span)
            .field("theta_span", &self.theta_span)
            .finish_non_exhaustive()
    }
}

struct Context<'a> {
    params: &'a BTreeMap<String, f64>,
}

impl Context<'_> {
    fn scalar(&self, s: &Scalar, path: &str) -> Result<f64, ConfigError> {
        let v = match s {
            Scalar::Number(v) => *v,
            Scalar::Expr(src) => {
                let e = self.expr(src, path)?;
                if let Some(stray) = e.free_vars().into_iter().next() {
                    return Err(ConfigError::new(path, format!("`{stray}` is not a parameter")));
                }
                e.eval(&Default::default())
                    .map_err(|err| ConfigError::new(path, err.to_string()))?
            }
        };
        if !v.is_finite() {
            return Err(ConfigError::new(path, "must be finite"));
        }
        Ok(v)
    }

    fn expr(&self, src: &str, path: &str) -> Result<Expr, ConfigError> {
        let e = parse(src).map_err(|err| ConfigError::new(path, err.to_string()))?;
        e.bind_constants(self.params)
            .map_err(|err| ConfigError::new(path, err.to_string()))
    }

    fn span(&self, span: &[Scalar; 2], path: &str) -> Result<(f64, f64), ConfigError> {
        let lo = self.scalar(&span[0], &format!("{path}[0]"))?;
        let hi = self.scalar(&span[1], &format!("{path}[1]"))?;
        if !(hi > lo) {
            return Err(ConfigError::new(path, format!("span [{lo}, {hi}] must be increasing")));
        }
        Ok((lo, hi))
    }
}

fn build_error(path: &str, err: ermakov_core::Error) -> ConfigError {
    ConfigError::new(path, err.to_string())
}

impl RunConfig {
    /// Check the configuration and build the models it describes.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let kind = self.system.kind;
        for name in self.system.params.keys() {
            let path = format!("system.params.{name}");
            if vars::RESERVED.contains(&name.as_str()) {
                return Err(ConfigError::new(path, "name is reserved for a variable"));
            }
            if !is_identifier(name) {
                return Err(ConfigError::new(path, "not a valid identifier"));
            }
        }
        let ctx = Context {
            params: &self.system.params,
        };

        let table = kind.functions();
        for name in self.system.functions.keys() {
            if !table.iter().any(|(n, _, _)| n == name) {
                let known: Vec<&str> = table.iter().map(|(n, _, _)| *n).collect();
                let msg = if known.is_empty() {
                    format!("kind {} takes no functions", kind.name())
                } else {
                    format!(
                        "unknown function for kind {} (expected one of {})",
                        kind.name(),
                        known.join(", ")
                    )
                };
                return Err(ConfigError::new(format!("system.functions.{name}"), msg));
            }
        }
        let mut funcs: BTreeMap<&str, Expr> = BTreeMap::new();
        for (name, allowed, required) in table {
            let path = format!("system.functions.{name}");
            match self.system.functions.get(*name) {
                Some(src) => {
                    let e = ctx.expr(src, &path)?;
                    check_vars(&e, allowed, name).map_err(|err| build_error(&path, err))?;
                    funcs.insert(name, e);
                }
                None if *required => {
                    return Err(ConfigError::new(
                        path,
                        format!("missing (required for kind {})", kind.name()),
                    ));
                }
                None => {}
            }
        }
        let f = |name: &str| funcs[name].clone();

        let t_span = ctx.span(&self.t_span, "t_span")?;
        let theta_span = self
            .theta_span
            .as_ref()
            .map(|s| ctx.span(s, "theta_span"))
            .transpose()?;

        let (direct, linear, omega_sq): (Box<dyn PolarSystem>, Option<LinearizableSpec>, Option<Expr>) = match kind {
            Kind::Cartesian => {
                let spec = CartesianSpec::new(f("f"), f("g"), f("omega_sq")).map_err(|e| build_error("system", e))?;
                let polar = polar_from_cartesian(&spec).map_err(|e| build_error("system", e))?;
                (Box::new(polar), None, None)
            }
            Kind::Polar => {
                let spec = PolarSpec::new(f("F"), f("V"), f("omega_sq")).map_err(|e| build_error("system", e))?;
                (Box::new(spec), None, None)
            }
            Kind::Linearizable => {
                let spec = LinearizableSpec::new(f("rho"), f("A"), f("B"), f("C"), f("F"), f("V"))
                    .map_err(|e| build_error("system", e))?;
                match funcs.get("omega_sq") {
                    Some(w) => {
                        let direct = PolarSpec::new(f("F"), f("V"), w.clone())
                            .map_err(|e| build_error("system.functions.omega_sq", e))?;
                        (Box::new(direct), Some(spec), Some(w.clone()))
                    }
                    None => (Box::new(spec.clone()), Some(spec), None),
                }
            }
            Kind::Kepler => {
                let spec = KeplerErmakovSpec::new(f("F"), f("G"), f("V")).map_err(|e| build_error("system", e))?;
                let linear = spec.to_linearizable().map_err(|e| build_error("system", e))?;
                (Box::new(spec), Some(linear), None)
            }
            Kind::Winternitz => {
                let params = winternitz_params(&self.system.params)?;
                let spec = winternitz_system(&params).map_err(|e| build_error("system.params", e))?;
                let linear = spec.to_linearizable().map_err(|e| build_error("system", e))?;
                (Box::new(spec), Some(linear), None)
            }
            Kind::FreeMotion => {
                let sys = free_motion_system(&f("f"), &f("rho")).map_err(|e| build_error("system", e))?;
                (Box::new(sys.linearizable.clone()), Some(sys.linearizable), None)
            }
        };

        let state = self.initial_polar(&ctx, t_span.0, direct.coupling())?;

        let tol = &self.tolerances;
        let mut integrator = IntegratorConfig::over(t_span.0, t_span.1).with_tolerances(tol.rel, tol.abs);
        if let Some(h) = tol.max_step {
            integrator.max_step = h;
        }
        if let Some(n) = tol.max_steps {
            integrator.max_steps = n;
        }
        integrator.validate().map_err(|e| build_error("tolerances", e))?;

        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(ConfigError::new("samples", "need at least 2 rows"));
        }
        let th = &self.thresholds;
        for (name, v) in [
            ("drift", th.drift),
            ("round_trip", th.round_trip),
            ("compatibility", th.compatibility),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(
                    format!("thresholds.{name}"),
                    "must be positive and finite",
                ));
            }
        }

        Ok(Prepared {
            kind,
            direct,
            linear,
            omega_sq,
            state,
            t_span,
            theta_span,
            integrator,
            samples,
            thresholds: self.thresholds,
            out_dir: self.output.dir.clone(),
            mode: self.mode,
        })
    }

    fn initial_polar(&self, ctx: &Context<'_>, t0: f64, coupling: &Expr) -> Result<PolarState, ConfigError> {
        match &self.initial_state {
            InitialState::Polar(p) => {
                let base = "initial_state.polar";
                let s = PolarState {
                    t: t0,
                    r: ctx.scalar(&p.r, &format!("{base}.r"))?,
                    theta: ctx.scalar(&p.theta, &format!("{base}.theta"))?,
                    rdot: ctx.scalar(&p.rdot, &format!("{base}.rdot"))?,
                    thetadot: ctx.scalar(&p.thetadot, &format!("{base}.thetadot"))?,
                };
                if !(s.r > 0.0) {
                    return Err(ConfigError::new(format!("{base}.r"), "radius must be positive"));
                }
                Ok(s)
            }
            InitialState::Cartesian(c) => {
                let base = "initial_state.cartesian";
                let s = CartesianState {
                    t: t0,
                    x: ctx.scalar(&c.x, &format!("{base}.x"))?,
                    y: ctx.scalar(&c.y, &format!("{base}.y"))?,
                    xdot: ctx.scalar(&c.xdot, &format!("{base}.xdot"))?,
                    ydot: ctx.scalar(&c.ydot, &format!("{base}.ydot"))?,
                };
                if !coupling.is_zero_literal() && (s.x == 0.0 || s.y == 0.0) {
                    return Err(ConfigError::new(
                        base,
                        "position lies on an axis where the coupling is singular",
                    ));
                }
                s.to_polar().map_err(|e| build_error(base, e))
            }
        }
    }
}

fn winternitz_params(params: &BTreeMap<String, f64>) -> Result<WinternitzParams, ConfigError> {
    let get = |name: &str| {
        params.get(name).copied().ok_or_else(|| {
            ConfigError::new(
                format!("system.params.{name}"),
                "missing (required for kind winternitz)",
            )
        })
    };
    Ok(WinternitzParams {
        mu0: get("mu0")?,
        g1: get("g1")?,
        g2: get("g2")?,
        g3: get("g3")?,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepare(json: &str) -> Result<Prepared, ConfigError> {
        RunConfig::from_json(json)?.prepare()
    }

    const POLAR: &str = r#"{
        "system": {"kind": "polar", "functions": {"F": "0", "V": "k*sin(theta)^2", "omega_sq": "1"}, "params": {"k": 0.5}},
        "initial_state": {"polar": {"r": 1, "theta": "pi/4", "rdot": 0, "thetadot": 1}},
        "t_span": [0, 1]
    }"#;

    #[test]
    fn polar_config_prepares() {
        let p = prepare(POLAR).unwrap();
        assert_eq!(p.kind, Kind::Polar);
        assert!((p.state.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(
            (p.direct
                .potential()
                .eval_at(THETA, std::f64::consts::FRAC_PI_2)
                .unwrap()
                - 0.5)
                .abs()
                < 1e-15
        );
        assert!(p.linear.is_none());
        assert_eq!(p.samples, DEFAULT_SAMPLES);
    }

    #[test]
    fn missing_function_names_its_path() {
        let err = prepare(&POLAR.replace(r#""V": "k*sin(theta)^2", "#, "")).unwrap_err();
        assert_eq!(err.path, "system.functions.V");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_path() {
        let err = prepare(&POLAR.replace(r#""t_span""#, r#""tspan": [0, 1], "t_span""#)).unwrap_err();
        assert!(err.message.contains("tspan"), "{err}");
        let err = prepare(&POLAR.replace(r#""rdot": 0"#, r#""rdot": 0, "rddot": 1"#)).unwrap_err();
        assert!(err.path.starts_with("initial_state.polar"), "{err}");
    }

    #[test]
    fn misspelled_function_is_rejected() {
        let err = prepare(&POLAR.replace(r#""F": "0""#, r#""FF": "0""#)).unwrap_err();
        assert_eq!(err.path, "system.functions.FF");
    }

    #[test]
    fn stray_variables_are_rejected() {
        let err = prepare(&POLAR.replace("k*sin(theta)^2", "r*sin(theta)")).unwrap_err();
        assert_eq!(err.path, "system.functions.V");
    }

    #[test]
    fn degenerate_span_is_rejected() {
        let err = prepare(&POLAR.replace(r#""t_span": [0, 1]"#, r#""t_span": [0, 0]"#)).unwrap_err();
        assert_eq!(err.path, "t_span");
    }

    #[test]
    fn reserved_parameter_names_are_rejected() {
        let err = prepare(&POLAR.replace(r#""params": {"k": 0.5}"#, r#""params": {"k": 0.5, "r": 2}"#)).unwrap_err();
        assert_eq!(err.path, "system.params.r");
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        let err = prepare(&POLAR.replace(r#""r": 1"#, r#""r": 0"#)).unwrap_err();
        assert_eq!(err.path, "initial_state.polar.r");
    }

    #[test]
    fn winternitz_needs_its_parameters() {
        let json = r#"{
            "system": {"kind": "winternitz", "params": {"mu0": 1, "g1": 1, "g2": 0.5}},
            "initial_state": {"polar": {"r": 1, "theta": "pi/2", "rdot": 0, "thetadot": 2}},
            "t_span": [0, 10]
        }"#;
        assert_eq!(prepare(json).unwrap_err().path, "system.params.g3");
        let ok = json.replace(r#""g2": 0.5"#, r#""g2": 0.5, "g3": 1"#);
        let p = prepare(&ok).unwrap();
        assert!(p.linear.is_some());
    }

    #[test]
    fn cartesian_state_on_a_singular_axis_is_rejected() {
        let json = r#"{
            "system": {"kind": "cartesian", "functions": {"f": "u", "g": "0", "omega_sq": "1"}},
            "initial_state": {"cartesian": {"x": 0, "y": 1, "xdot": 1, "ydot": 0}},
            "t_span": [0, 1]
        }"#;
        assert_eq!(prepare(json).unwrap_err().path, "initial_state.cartesian");
    }

    #[test]
    fn linearizable_override_drives_the_direct_system() {
        let json = r#"{
            "system": {"kind": "linearizable", "functions": {"rho": "cos(t)", "A": "0", "B": "0", "C": "0", "F": "0", "V": "0", "omega_sq": "1"}},
            "initial_state": {"polar": {"r": 1, "theta": 0, "rdot": 0, "thetadot": 1}},
            "t_span": [0, 1]
        }"#;
        let p = prepare(json).unwrap();
        assert!(p.omega_sq.is_some());
        assert!(p.linear.unwrap().cubic_term().is_zero_literal());
    }
}
