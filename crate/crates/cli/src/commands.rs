use std::path::{Path, PathBuf};

use ermakov_core::integrate::{detect_events, integrate_polar, polar_samples, DriftStats, StepStats, Termination};
use ermakov_core::invariant::lewis_ray_reid_polar;
use ermakov_core::linearize::{
    build_linear_ode, check_window, compatibility_residual, find_boundary, initial_psi, linear_config, reconstruct,
    sample_linear_ode, solve_linear, PipelineOptions,
};
use ermakov_core::{BranchSign, Error as CoreError, LinearizableSpec, PolarState, PolarSystem, Trajectory};
use log::{info, warn};
use serde::Serialize;

use crate::config::{ConfigError, Prepared, Thresholds};
use crate::output::{write_csv, write_json};
use crate::CliError;

/// How a command ended, mapped onto the exit status by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Validation thresholds were missed.
    Failed,
    /// Output was written but the run stopped early.
    Incomplete,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: serde_json::Value,
}

fn outcome<T: Serialize>(status: Status, summary: &T) -> Result<Outcome, CliError> {
    Ok(Outcome {
        status,
        summary: serde_json::to_value(summary).map_err(|e| CliError::Io {
            context: "serializing summary".into(),
            source: std::io::Error::other(e),
        })?,
    })
}

fn io_context(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let last = n - 1;
    (0..n)
        .map(|k| {
            if k == last {
                hi
            } else {
                lo + (hi - lo) * k as f64 / last as f64
            }
        })
        .collect()
}

fn describe(termination: &Termination) -> String {
    termination
        .to_error()
        .map_or_else(|| "completed".to_string(), |e| e.to_string())
}

fn branch_label(branch: BranchSign) -> i8 {
    match branch {
        BranchSign::Positive => 1,
        BranchSign::Negative => -1,
    }
}

fn linear_spec<'a>(prep: &'a Prepared, command: &str) -> Result<&'a LinearizableSpec, CliError> {
    prep.linear.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError::new(
            "system.kind",
            format!(
                "{command} needs kind linearizable, kepler, winternitz or free_motion, not {}",
                prep.kind.name()
            ),
        ))
    })
}

#[derive(Serialize)]
struct Drift {
    initial_invariant: f64,
    max: f64,
    rms: f64,
}

impl From<&DriftStats> for Drift {
    fn from(d: &DriftStats) -> Self {
        Drift {
            initial_invariant: d.initial,
            max: d.max,
            rms: d.rms,
        }
    }
}

#[derive(Serialize)]
struct Steps {
    accepted: usize,
    rejected: usize,
    rhs_evals: usize,
}

impl From<StepStats> for Steps {
    fn from(s: StepStats) -> Self {
        Steps {
            accepted: s.accepted,
            rejected: s.rejected,
            rhs_evals: s.rhs_evals,
        }
    }
}

#[derive(Serialize)]
struct EventOut {
    kind: &'static str,
    t: f64,
    r: f64,
    theta: f64,
}

#[derive(Serialize)]
struct SimulateSummary {
    command: &'static str,
    kind: &'static str,
    termination: String,
    completed: bool,
    t_end: f64,
    samples: usize,
    steps: Steps,
    drift: Option<Drift>,
    events: Vec<EventOut>,
    csv: PathBuf,
}

fn run_direct(prep: &Prepared) -> Result<Trajectory<4>, CliError> {
    info!(
        "integrating {} system over [{}, {}]",
        prep.kind.name(),
        prep.t_span.0,
        prep.t_span.1
    );
    Ok(integrate_polar(&*prep.direct, &prep.state, &prep.integrator)?)
}

/// Integrate directly; write `trajectory.csv` and `simulate.json`.
pub fn simulate(prep: &Prepared, out: &Path) -> Result<Outcome, CliError> {
    let traj = run_direct(prep)?;
    let potential = prep.direct.potential();
    let rows = polar_samples(&traj)
        .iter()
        .map(|s| {
            Ok(vec![
                s.t,
                s.r,
                s.theta,
                s.rdot,
                s.thetadot,
                lewis_ray_reid_polar(s, potential)?.value,
            ])
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let csv = out.join("trajectory.csv");
    write_csv(&csv, &["t", "r", "theta", "rdot", "thetadot", "I"], &rows).map_err(io_context(&csv))?;

    let events = detect_events(&traj, &*prep.direct, &prep.integrator)
        .into_iter()
        .map(|e| EventOut {
            kind: e.kind.label(),
            t: e.t,
            r: e.state[0],
            theta: e.state[1],
        })
        .collect();
    let completed = traj.termination().is_completed();
    if !completed {
        warn!("run stopped early: {}", describe(traj.termination()));
    }
    let summary = SimulateSummary {
        command: "simulate",
        kind: prep.kind.name(),
        termination: describe(traj.termination()),
        completed,
        t_end: traj.t_end(),
        samples: traj.len(),
        steps: traj.stats().into(),
        drift: traj.invariant_drift().map(Drift::from),
        events,
        csv,
    };
    write_json(&out.join("simulate.json"), &summary).map_err(io_context(&out.join("simulate.json")))?;
    outcome(if completed { Status::Success } else { Status::Incomplete }, &summary)
}

/// The angular window from the initial angle in the direction of motion,
/// ending just short of the first turning point.
fn working_window(
    spec: &LinearizableSpec,
    invariant: f64,
    branch: BranchSign,
    theta0: f64,
) -> Result<(f64, f64), CliError> {
    let opts = PipelineOptions::default();
    let sign = branch.value();
    let sweep_end = theta0 + sign * opts.max_sweep;
    let limit = match find_boundary(spec.potential(), invariant, theta0, sweep_end)? {
        Some((theta, _)) if theta == theta0 => return Err(CoreError::TurningPoint { theta }.into()),
        Some((theta, _)) => theta - sign * opts.margin.min(0.5 * (theta - theta0).abs()),
        None => sweep_end,
    };
    Ok((theta0.min(limit), theta0.max(limit)))
}

#[derive(Serialize)]
struct LinearizeSummary {
    command: &'static str,
    kind: &'static str,
    invariant: f64,
    branch: i8,
    theta_window: (f64, f64),
    homogeneous: bool,
    psi0: f64,
    dpsi0: f64,
    csv: PathBuf,
}

/// Sample the linear equation and its solution; write `linear.csv` and
/// `linearize.json`.
pub fn linearize(prep: &Prepared, out: &Path) -> Result<Outcome, CliError> {
    let spec = linear_spec(prep, "linearize")?;
    let s0 = &prep.state;
    let invariant = lewis_ray_reid_polar(s0, spec.potential())?.value;
    let branch = BranchSign::from_rate(s0.thetadot, s0.theta)?;
    let window = match prep.theta_span {
        Some((lo, hi)) => {
            if !(lo <= s0.theta && s0.theta <= hi) {
                return Err(ConfigError::new(
                    "theta_span",
                    format!("[{lo}, {hi}] must contain the initial angle {}", s0.theta),
                )
                .into());
            }
            check_window(spec.potential(), invariant, s0.theta, hi)?;
            check_window(spec.potential(), invariant, s0.theta, lo)?;
            (lo, hi)
        }
        None => working_window(spec, invariant, branch, s0.theta)?,
    };
    info!(
        "linear equation on theta in [{}, {}] with I = {invariant}",
        window.0, window.1
    );
    let ode = build_linear_ode(spec, invariant, branch, window)?;
    let (psi0, dpsi0) = initial_psi(spec, s0)?;
    let solution = solve_linear(&ode, s0.theta, psi0, dpsi0, window, &linear_config())?;
    let grid = linspace(window.0, window.1, prep.samples);
    let rows: Vec<Vec<f64>> = sample_linear_ode(&ode, &grid, Some(&solution))?
        .iter()
        .map(|row| {
            let k = row.coefficients;
            vec![row.theta, k.p2, k.p1, k.p0, k.rhs, row.psi.unwrap_or(f64::NAN)]
        })
        .collect();
    let csv = out.join("linear.csv");
    write_csv(&csv, &["theta", "p2", "p1", "p0", "rhs", "psi"], &rows).map_err(io_context(&csv))?;
    let summary = LinearizeSummary {
        command: "linearize",
        kind: prep.kind.name(),
        invariant,
        branch: branch_label(branch),
        theta_window: window,
        homogeneous: ode.is_homogeneous(),
        psi0,
        dpsi0,
        csv,
    };
    write_json(&out.join("linearize.json"), &summary).map_err(io_context(&out.join("linearize.json")))?;
    outcome(Status::Success, &summary)
}

#[derive(Serialize)]
struct ReconstructSummary {
    command: &'static str,
    kind: &'static str,
    invariant: f64,
    branch: i8,
    theta_window: (f64, f64),
    time_window: (f64, f64),
    csv: PathBuf,
}

/// Solve through the linear equation and the time quadrature; write
/// `reconstruct.csv` and `reconstruct.json`.
pub fn reconstruct_cmd(prep: &Prepared, out: &Path) -> Result<Outcome, CliError> {
    let spec = linear_spec(prep, "reconstruct")?;
    info!("reconstructing over [{}, {}]", prep.t_span.0, prep.t_span.1);
    let rec = reconstruct(spec, &prep.state, prep.t_span.1, &PipelineOptions::default())?;
    let rows = linspace(prep.t_span.0, prep.t_span.1, prep.samples)
        .into_iter()
        .map(|t| {
            let theta = rec.theta_at(t)?;
            Ok(vec![t, theta, rec.r_at(t)?, rec.psi_at(theta)?])
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let csv = out.join("reconstruct.csv");
    write_csv(&csv, &["t", "theta", "r", "psi"], &rows).map_err(io_context(&csv))?;
    let summary = ReconstructSummary {
        command: "reconstruct",
        kind: prep.kind.name(),
        invariant: rec.invariant,
        branch: branch_label(rec.branch),
        theta_window: rec.quadrature.theta_window(),
        time_window: rec.quadrature.time_window(),
        csv,
    };
    write_json(&out.join("reconstruct.json"), &summary).map_err(io_context(&out.join("reconstruct.json")))?;
    outcome(Status::Success, &summary)
}

#[derive(Serialize)]
struct Metric {
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Metric {
    fn new(value: f64, threshold: f64) -> Self {
        Metric {
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Serialize)]
struct RoundTrip {
    r: f64,
    theta: f64,
    #[serde(flatten)]
    metric: Metric,
}

#[derive(Serialize)]
struct Compatibility {
    mean: f64,
    states: usize,
    #[serde(flatten)]
    metric: Metric,
}

/// Outcome of `validate`.
#[derive(Serialize)]
pub struct ValidationReport {
    command: &'static str,
    kind: &'static str,
    thresholds: Thresholds,
    drift: Option<Metric>,
    round_trip: Option<RoundTrip>,
    compatibility: Option<Compatibility>,
    homogeneous: Option<bool>,
    errors: Vec<String>,
    pub pass: bool,
}

fn round_trip_errors(spec: &LinearizableSpec, prep: &Prepared, traj: &Trajectory<4>) -> Result<(f64, f64), CoreError> {
    let rec = reconstruct(spec, &prep.state, traj.t_end(), &PipelineOptions::default())?;
    let (mut r_err, mut theta_err) = (0.0f64, 0.0f64);
    for (t, y) in traj.samples() {
        r_err = r_err.max((rec.r_at(t)? - y[0]).abs());
        theta_err = theta_err.max((rec.theta_at(t)? - y[1]).abs());
    }
    Ok((r_err, theta_err))
}

fn compatibility_stats(
    spec: &LinearizableSpec,
    prep: &Prepared,
    states: &[PolarState],
) -> Result<(f64, f64), CoreError> {
    let omega_sq = match &prep.omega_sq {
        Some(w) => w.clone(),
        None => spec.frequency()?,
    };
    let residuals = states
        .iter()
        .map(|s| compatibility_residual(&omega_sq, spec, s))
        .collect::<Result<Vec<f64>, _>>()?;
    let max = residuals.iter().copied().fold(0.0, f64::max);
    Ok((max, residuals.iter().sum::<f64>() / residuals.len() as f64))
}

/// Simulate, reconstruct and check compatibility; write `validation.json`.
pub fn validate(prep: &Prepared, out: &Path) -> Result<Outcome, CliError> {
    let th = prep.thresholds;
    let mut errors = Vec::new();
    let mut report = ValidationReport {
        command: "validate",
        kind: prep.kind.name(),
        thresholds: th,
        drift: None,
        round_trip: None,
        compatibility: None,
        homogeneous: prep.linear.as_ref().map(|s| s.cubic_term().is_zero_literal()),
        errors: Vec::new(),
        pass: false,
    };
    match run_direct(prep) {
        Err(e) => errors.push(format!("simulate: {e}")),
        Ok(traj) => {
            if !traj.termination().is_completed() {
                errors.push(format!("simulate: {}", describe(traj.termination())));
            }
            report.drift = traj.invariant_drift().map(|d| Metric::new(d.max, th.drift));
            if let Some(spec) = &prep.linear {
                if traj.t_end() > prep.t_span.0 {
                    match round_trip_errors(spec, prep, &traj) {
                        Ok((r, theta)) => {
                            report.round_trip = Some(RoundTrip {
                                r,
                                theta,
                                metric: Metric::new(r.max(theta), th.round_trip),
                            })
                        }
                        Err(e) => errors.push(format!("reconstruct: {e}")),
                    }
                }
                let states = polar_samples(&traj);
                match compatibility_stats(spec, prep, &states) {
                    Ok((max, mean)) => {
                        report.compatibility = Some(Compatibility {
                            mean,
                            states: states.len(),
                            metric: Metric::new(max, th.compatibility),
                        })
                    }
                    Err(e) => errors.push(format!("compatibility: {e}")),
                }
            }
        }
    }
    let metrics_pass = report.drift.as_ref().is_none_or(|m| m.pass)
        && report.round_trip.as_ref().is_none_or(|m| m.metric.pass)
        && report.compatibility.as_ref().is_none_or(|m| m.metric.pass);
    report.pass = errors.is_empty() && metrics_pass && report.drift.is_some();
    report.errors = errors;
    for e in &report.errors {
        warn!("{e}");
    }
    let path = out.join("validation.json");
    write_json(&path, &report).map_err(io_context(&path))?;
    outcome(if report.pass { Status::Success } else { Status::Failed }, &report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::presets;

    fn preset(name: &str) -> Prepared {
        RunConfig::from_json(presets::get(name).unwrap())
            .unwrap()
            .prepare()
            .unwrap()
    }

    #[test]
    fn linspace_hits_both_ends() {
        let g = linspace(0.1, 0.7, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.7);
    }

    #[test]
    fn winternitz_validates() {
        let dir = tempfile::tempdir().unwrap();
        let o = validate(&preset("winternitz-default"), dir.path()).unwrap();
        assert_eq!(o.status, Status::Success, "{}", o.summary);
        assert_eq!(o.summary["homogeneous"], false);
    }

    #[test]
    fn working_window_stops_short_of_the_turning_point() {
        let p = preset("winternitz-default");
        let spec = p.linear.as_ref().unwrap();
        let (lo, hi) = working_window(spec, 3.0, BranchSign::Positive, p.state.theta).unwrap();
        assert_eq!(lo, p.state.theta);
        // V = 3 where 3 cos^2 + cos/2 - 2 = 0
        let c = (-0.5 - (0.25f64 + 24.0).sqrt()) / 6.0;
        assert!((hi - c.acos()).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn reconstruct_rejects_plain_polar_kinds() {
        let json = r#"{
            "system": {"kind": "polar", "functions": {"F": "0", "V": "0", "omega_sq": "1"}},
            "initial_state": {"polar": {"r": 1, "theta": 0, "rdot": 0, "thetadot": 1}},
            "t_span": [0, 1]
        }"#;
        let prep = RunConfig::from_json(json).unwrap().prepare().unwrap();
        let dir = tempfile::tempdir().unwrap();
        match reconstruct_cmd(&prep, dir.path()) {
            Err(CliError::Config(e)) => assert_eq!(e.path, "system.kind"),
            other => panic!("{other:?}"),
        }
    }
}
