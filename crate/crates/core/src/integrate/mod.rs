//! Direct integration of the equations of motion.
//!
//! The stepper is the Dormand-Prince 5(4) pair with local extrapolation,
//! a proportional-integral step controller and the pair's free fourth-order
//! interpolant for dense output. Event functions are checked after every
//! accepted step and located by bisection on the interpolant.

mod cartesian;
mod polar;

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric;

pub use cartesian::integrate_cartesian;
pub use polar::{
    detect_events, drift_of_states, integrate_polar, monitor_invariant, polar_samples, singular_axes, DriftStats,
    SingularAxes,
};

// Butcher tableau.
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Settings for a single integration run.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_span: (f64, f64),
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Width of the final bisection bracket when locating events.
    pub event_time_tol: f64,
    /// Radius below which a polar run is stopped as collapsing.
    pub radial_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            t_span: (0.0, 1.0),
            initial_step: None,
            max_steps: 1_000_000,
            event_time_tol: 1e-10,
            radial_floor: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn over(t0: f64, t1: f64) -> Self {
        IntegratorConfig {
            t_span: (t0, t1),
            ..Default::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            ));
        }
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return bad(format!("t_span [{t0}, {t1}] must be finite and increasing"));
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step {} must be positive", self.max_step));
        }
        if !(self.event_time_tol > 0.0) {
            return bad("event_time_tol must be positive".into());
        }
        Ok(())
    }
}

/// Things an integration run can stop at or report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    TurningPoint,
    RadialCollapse,
    AxisCrossing,
    ScaleZero,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::TurningPoint => "turning-point",
            EventKind::RadialCollapse => "radial-collapse",
            EventKind::AxisCrossing => "axis-crossing",
            EventKind::ScaleZero => "scale-zero",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A located event.
#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord<const N: usize> {
    pub kind: EventKind,
    pub t: f64,
    pub state: [f64; N],
}

type Scalar<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// A scalar event function whose sign changes mark the event.
pub struct EventFn<'a, const N: usize> {
    pub kind: EventKind,
    pub terminal: bool,
    pub func: Scalar<'a, N>,
}

impl<'a, const N: usize> EventFn<'a, N> {
    pub fn new<F>(kind: EventKind, terminal: bool, func: F) -> Self
    where
        F: Fn(f64, &[f64; N]) -> f64 + 'a,
    {
        EventFn {
            kind,
            terminal,
            func: Box::new(func),
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    Event { kind: EventKind, t: f64 },
    StepSizeUnderflow { t: f64, h: f64 },
    RhsFailure { t: f64, error: Error },
    StepLimit { t: f64 },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn to_error(&self) -> Option<Error> {
        match self {
            Termination::Completed => None,
            Termination::Event { kind, t } => Some(Error::EventTermination { kind: *kind, t: *t }),
            Termination::StepSizeUnderflow { t, h } => Some(Error::StepSizeUnderflow { t: *t, h: *h }),
            Termination::RhsFailure { error, .. } => Some(error.clone()),
            Termination::StepLimit { t } => Some(Error::StepLimit { t: *t }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Interpolant over one accepted step.
#[derive(Clone, Debug)]
struct DenseSegment<const N: usize> {
    t: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.coeffs;
        std::array::from_fn(|i| c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i]))))
    }
}

/// Time-ordered samples of a run, with dense output between them.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    segments: Vec<DenseSegment<N>>,
    stats: StepStats,
    termination: Termination,
    events: Vec<EventRecord<N>>,
    drift: Option<DriftStats>,
}

impl<const N: usize> Trajectory<N> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64; N])> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial sample")
    }

    pub fn last_state(&self) -> &[f64; N] {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn termination(&self) -> &Termination {
        &self.termination
    }

    /// Events located during the run (terminal ones included).
    pub fn events(&self) -> &[EventRecord<N>] {
        &self.events
    }

    pub fn invariant_drift(&self) -> Option<&DriftStats> {
        self.drift.as_ref()
    }

    pub fn set_invariant_drift(&mut self, drift: DriftStats) {
        self.drift = Some(drift);
    }

    /// Dense-output state at `t`, or `None` outside the covered window.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.states[0]);
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.t + seg.h < t)
            .min(self.segments.len() - 1);
        Some(self.segments[idx].eval(t))
    }

    /// Ok when the run covered its whole span.
    pub fn into_result(self) -> Result<Self> {
        match self.termination.to_error() {
            None => Ok(self),
            Some(e) => Err(e),
        }
    }

    fn locate(&self, seg: &DenseSegment<N>, a: f64, b: f64, g: &dyn Fn(f64, &[f64; N]) -> f64, tol: f64) -> f64 {
        numeric::bisect(|t| Ok(g(t, &seg.eval(t))), a, b, tol).unwrap_or(b)
    }

    /// Sign changes of `g` between samples, located on the interpolant.
    pub fn find_crossings(&self, g: &dyn Fn(f64, &[f64; N]) -> f64, tol: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let (ta, tb) = (self.times[k], self.times[k + 1]);
            let ga = g(ta, &self.states[k]);
            let gb = g(tb, &self.states[k + 1]);
            if ga == 0.0 && k > 0 {
                continue;
            }
            if ga * gb < 0.0 || (gb == 0.0 && ga != 0.0) {
                out.push(self.locate(seg, ta, tb, g, tol));
            }
        }
        out
    }

    /// Append extra event records (used by post-hoc detection).
    pub fn with_events(mut self, extra: Vec<EventRecord<N>>) -> Self {
        self.events.extend(extra);
        self.events.sort_by(|a, b| a.t.total_cmp(&b.t));
        self
    }
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    (0..N)
        .map(|i| err[i].abs() / (cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs())))
        .fold(0.0, f64::max)
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    cfg: &IntegratorConfig,
    stats: &mut StepStats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let span = cfg.t_span.1 - cfg.t_span.0;
    let sc: [f64; N] = std::array::from_fn(|i| cfg.abs_tol + cfg.rel_tol * y0[i].abs());
    let norm = |v: &[f64; N]| ((0..N).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(span);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0, &y1)?;
    stats.rhs_evals += 1;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step).min(span))
}

/// Integrate `y' = rhs(t, y)` over `cfg.t_span` from `y0`.
pub fn integrate<const N: usize, F>(rhs: F, y0: [f64; N], cfg: &IntegratorConfig) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    integrate_with_events(rhs, y0, cfg, &[])
}

/// [`integrate`] with event functions. Terminal events truncate the run at
/// the located event time.
pub fn integrate_with_events<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    events: &[EventFn<'_, N>],
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    cfg.validate()?;
    let (t0, t_final) = cfg.t_span;
    let mut stats = StepStats::default();
    let mut k1 = rhs(t0, &y0)?;
    stats.rhs_evals += 1;

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        segments: Vec::new(),
        stats,
        termination: Termination::Completed,
        events: Vec::new(),
        drift: None,
    };
    let mut h = match cfg.initial_step {
        Some(h) => h.min(t_final - t0),
        None => initial_step(&mut rhs, t0, &y0, &k1, cfg, &mut stats)?,
    };
    let mut t = t0;
    let mut y = y0;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.func)(t0, &y0)).collect();

    let termination = loop {
        if t >= t_final {
            break Termination::Completed;
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            break Termination::StepLimit { t };
        }
        h = h.min(cfg.max_step);
        let remaining = t_final - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            break Termination::StepSizeUnderflow { t, h };
        }

        let stages = (|| -> Result<_> {
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y_new)?;
            Ok((k2, k3, k4, k5, k6, k7, y_new))
        })();
        stats.rhs_evals += 6;

        let (_k2, k3, k4, k5, k6, k7, y_new) = match stages {
            Ok(v) => v,
            Err(e) => {
                // a failing stage is treated like a badly rejected step
                stats.rejected += 1;
                last_rejected = true;
                h *= 0.25;
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    break Termination::RhsFailure { t, error: e };
                }
                continue;
            }
        };

        let err_vec = axpy(
            &[0.0; N],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let err = error_norm(&err_vec, &y, &y_new, cfg);
        if !err.is_finite() {
            stats.rejected += 1;
            last_rejected = true;
            h *= 0.25;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            last_rejected = false;
            stats.accepted += 1;

            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let seg = DenseSegment {
                t,
                h,
                coeffs: [
                    y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                    axpy(
                        &[0.0; N],
                        h,
                        &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
                    ),
                ],
            };
            let t_new = if last { t_final } else { t + h };

            // events: earliest terminal crossing wins
            let mut stop: Option<(f64, EventKind)> = None;
            for (idx, ev) in events.iter().enumerate() {
                let g_new = (ev.func)(t_new, &y_new);
                let g_old = g_prev[idx];
                if g_old * g_new < 0.0 || (g_new == 0.0 && g_old != 0.0) {
                    let te = numeric::bisect(|s| Ok((ev.func)(s, &seg.eval(s))), t, t_new, cfg.event_time_tol)
                        .unwrap_or(t_new);
                    if ev.terminal {
                        if stop.is_none_or(|(ts, _)| te < ts) {
                            stop = Some((te, ev.kind));
                        }
                    } else {
                        traj.events.push(EventRecord {
                            kind: ev.kind,
                            t: te,
                            state: seg.eval(te),
                        });
                    }
                }
                g_prev[idx] = g_new;
            }

            traj.segments.push(seg);
            if let Some((te, kind)) = stop {
                let state = traj.segments.last().expect("just pushed").eval(te);
                // non-terminal events past the stopping point are dropped
                traj.events.retain(|e| e.t <= te);
                traj.events.push(EventRecord { kind, t: te, state });
                if te > t {
                    traj.times.push(te);
                    traj.states.push(state);
                } else {
                    traj.segments.pop();
                }
                break Termination::Event { kind, t: te };
            }
            traj.times.push(t_new);
            traj.states.push(y_new);
            t = t_new;
            y = y_new;
            k1 = k7;
            h = h_new;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    };

    traj.stats = stats;
    traj.termination = termination;
    traj.events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_period() {
        let cfg = IntegratorConfig::over(0.0, 2.0 * PI);
        let traj = integrate(oscillator, [1.0, 0.0], &cfg).unwrap().into_result().unwrap();
        let y = traj.last_state();
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
        assert_eq!(traj.t_end(), 2.0 * PI);
    }

    #[test]
    fn times_strictly_increase() {
        let cfg = IntegratorConfig::over(0.0, 10.0);
        let traj = integrate(oscillator, [1.0, 0.0], &cfg).unwrap();
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
        let stats = traj.stats();
        assert!(stats.accepted > 0);
        assert!(stats.rhs_evals >= 6 * stats.accepted);
    }

    #[test]
    fn dense_output_is_local_fourth_order() {
        // compare the interpolant with the exact solution through the
        // step's own starting point, which isolates interpolation error
        let cfg = IntegratorConfig::over(0.0, 2.0 * PI);
        let traj = integrate(oscillator, [1.0, 0.0], &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for (k, w) in traj.times().windows(2).enumerate() {
            let (ta, tb) = (w[0], w[1]);
            let ya = traj.states()[k];
            for frac in [0.25, 0.5, 0.75] {
                let t = ta + frac * (tb - ta);
                let dt = t - ta;
                let exact = ya[0] * dt.cos() + ya[1] * dt.sin();
                let dense = traj.eval(t).unwrap()[0];
                worst = worst.max((dense - exact).abs());
            }
        }
        assert!(worst <= 10.0 * cfg.rel_tol, "interpolation error {worst}");
    }

    #[test]
    fn eval_outside_window_is_none() {
        let traj = integrate(oscillator, [1.0, 0.0], &IntegratorConfig::over(0.0, 1.0)).unwrap();
        assert!(traj.eval(-0.1).is_none());
        assert!(traj.eval(1.1).is_none());
        assert_eq!(traj.eval(0.0).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn terminal_event_truncates() {
        let ev = EventFn::new(EventKind::TurningPoint, true, |_t, y: &[f64; 2]| y[0]);
        let cfg = IntegratorConfig::over(0.0, 10.0);
        let traj = integrate_with_events(oscillator, [1.0, 0.0], &cfg, &[ev]).unwrap();
        assert!((traj.t_end() - PI / 2.0).abs() < 1e-9);
        assert!(matches!(
            traj.termination(),
            Termination::Event {
                kind: EventKind::TurningPoint,
                ..
            }
        ));
        assert!(traj.clone().into_result().is_err());
        assert_eq!(traj.events().len(), 1);
    }

    #[test]
    fn non_terminal_events_are_recorded() {
        let ev = EventFn::new(EventKind::TurningPoint, false, |_t, y: &[f64; 2]| y[1]);
        let cfg = IntegratorConfig::over(0.0, 10.0);
        let traj = integrate_with_events(oscillator, [1.0, 0.0], &cfg, &[ev]).unwrap();
        // y' = -sin t vanishes at pi, 2pi, 3pi
        let times: Vec<f64> = traj.events().iter().map(|e| e.t).collect();
        assert_eq!(times.len(), 3);
        for (k, t) in times.iter().enumerate() {
            assert!((t - (k + 1) as f64 * PI).abs() < 1e-9, "{t}");
        }
        assert!(traj.termination().is_completed());
    }

    #[test]
    fn singularity_underflows() {
        // y' = y^2 blows up at t = 1
        let cfg = IntegratorConfig::over(0.0, 2.0);
        let traj = integrate(|_t, y: &[f64; 1]| Ok([y[0] * y[0]]), [1.0], &cfg).unwrap();
        assert!(matches!(
            traj.termination(),
            Termination::StepSizeUnderflow { .. } | Termination::RhsFailure { .. }
        ));
        assert!(traj.t_end() < 1.0 + 1e-6);
    }

    #[test]
    fn rhs_failure_is_reported() {
        let cfg = IntegratorConfig::over(0.0, 2.0);
        let traj = integrate(
            |t, y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::InvalidInput("wall".into()))
                } else {
                    Ok([y[0]])
                }
            },
            [1.0],
            &cfg,
        )
        .unwrap();
        assert!(matches!(traj.termination(), Termination::RhsFailure { .. }));
        assert!(traj.t_end() <= 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = IntegratorConfig::over(0.0, 0.0);
        assert!(integrate(oscillator, [1.0, 0.0], &cfg).is_err());
        cfg.t_span = (0.0, 1.0);
        cfg.rel_tol = 0.0;
        assert!(integrate(oscillator, [1.0, 0.0], &cfg).is_err());
    }
}
