//! Explicit time stepping of the radial graph under the normal speed
//! `S = u - b_{n,k} sinh(rho) sigma_k^{-1/k}`, with monitors for the
//! maximum-principle bounds.
//!
//! A normal velocity `S nu` moves the graph at fixed `xi` by
//! `rho_t = S w / cosh(rho)`. The expression `S cosh(rho) / w` is the rate
//! along the normal trajectories instead; both agree where `grad rho = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    geometry_field, normal_speed, point_scalars, validate_hypersurface, GeometryError,
    PointScalars, RadialGraph,
};
use crate::grids::GridError;
use crate::quermass::quermass_from_points;
use crate::symfunc::{b_nk, max_minor, sigma_stack};

/// Step rejections allowed before a run aborts.
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error("initial hypersurface rejected: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("diffusion bound is not finite ({0})")]
    Stiffness(f64),
    #[error("step at t = {t} rejected {attempts} times, last: {last}")]
    Rejected {
        t: f64,
        attempts: usize,
        last: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk4,
}

impl FromStr for Scheme {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(FlowError::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub n: usize,
    pub k: usize,
    pub cfl: f64,
    pub t_max: f64,
    pub conv_tol: f64,
    pub monitor_every: usize,
    pub scheme: Scheme,
    pub max_steps: usize,
}

impl FlowConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            cfl: 0.25,
            t_max: 50.0,
            conv_tol: 1e-6,
            monitor_every: 100,
            scheme: Scheme::Rk4,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |msg: String| Err(FlowError::Config(msg));
        if !(2..=self.n).contains(&self.k) {
            return bad(format!(
                "k = {} must satisfy 2 <= k <= n = {}",
                self.k, self.n
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl = {} must lie in (0, 1]", self.cfl));
        }
        if !(self.conv_tol > 0.0) {
            return bad(format!("conv_tol = {} must be positive", self.conv_tol));
        }
        if !(self.t_max >= 0.0) {
            return bad(format!("t_max = {} must be non-negative", self.t_max));
        }
        if self.monitor_every == 0 {
            return bad("monitor_every must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub graph: RadialGraph,
    pub last_dt: f64,
    pub steps: usize,
}

impl FlowState {
    pub fn new(graph: RadialGraph) -> Self {
        Self {
            t: 0.0,
            graph,
            last_dt: 0.0,
            steps: 0,
        }
    }
}

/// `rho_t` at every node with the extrema needed by the monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedField {
    pub rho_t: Vec<f64>,
    pub speed: Vec<f64>,
    pub min_speed: f64,
    pub max_abs_speed: f64,
    /// `F = sigma_k^{1/k}`
    pub min_f: f64,
    pub max_f: f64,
    pub max_abs_kappa: f64,
    pub max_u: f64,
    /// largest diffusion coefficient `b phi' F^-2 max f^i / w^2`
    pub d_max: f64,
}

impl SpeedField {
    pub fn max_abs_rate(&self) -> f64 {
        self.rho_t.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

/// `F = sigma_k^{1/k}` with the common roots taken directly.
#[inline]
fn kth_root(x: f64, k: usize) -> f64 {
    match k {
        1 => x,
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ => x.powf(1.0 / k as f64),
    }
}

/// `(S, F, diffusion coefficient)` at one node; same conventions as
/// [`normal_speed`], evaluated without allocation.
fn point_speed(
    pt: &PointScalars,
    k: usize,
    b: f64,
    strict: bool,
) -> Result<(f64, f64, f64), GeometryError> {
    let kappa = pt.kappa();
    let all = sigma_stack(kappa);
    let failing = (1..=k).find(|&j| !(all[j] > 0.0));
    if pt.sh == 0.0 && !strict {
        return Ok((pt.u, kth_root(all[k].max(0.0), k), 0.0));
    }
    if let Some(order) = failing {
        return Err(GeometryError::Cone {
            node: pt.node,
            k,
            order,
            value: all[order],
        });
    }
    let sk = all[k];
    let f = kth_root(sk, k);
    let s = pt.u - b * pt.sh / f;
    // max_i f^i = F / (k sigma_k) * max_i sigma_{k-1}(kappa | i)
    let fmax = f / (k as f64 * sk) * max_minor(kappa, k - 1);
    let coeff = b * pt.sh.abs() * fmax / (f * f * pt.w * pt.w);
    Ok((s, f, coeff))
}

fn evaluate(graph: &RadialGraph, k: usize, strict: bool) -> Result<SpeedField, GeometryError> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(GeometryError::Order { k, n });
    }
    let b = b_nk(n, k);
    let mut field = SpeedField {
        rho_t: Vec::with_capacity(graph.rho().len()),
        speed: Vec::with_capacity(graph.rho().len()),
        min_speed: f64::INFINITY,
        max_abs_speed: 0.0,
        min_f: f64::INFINITY,
        max_f: f64::NEG_INFINITY,
        max_abs_kappa: 0.0,
        max_u: f64::NEG_INFINITY,
        d_max: 0.0,
    };
    let mut failure = None;
    graph
        .grid()
        .visit_jets(graph.rho(), |jet| {
            if failure.is_some() {
                return;
            }
            let res =
                point_scalars(jet, n).and_then(|pt| Ok((pt, point_speed(&pt, k, b, strict)?)));
            let (pt, (s, f, coeff)) = match res {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            field.rho_t.push(s * pt.w / pt.ch);
            field.speed.push(s);
            field.min_speed = field.min_speed.min(s);
            field.max_abs_speed = field.max_abs_speed.max(s.abs());
            field.min_f = field.min_f.min(f);
            field.max_f = field.max_f.max(f);
            field.max_abs_kappa = field.max_abs_kappa.max(pt.max_abs_kappa());
            field.max_u = field.max_u.max(pt.u);
            field.d_max = field.d_max.max(coeff);
        })
        .expect("radial function validated on construction");
    match failure {
        Some(e) => Err(e),
        None => Ok(field),
    }
}

/// `rho_t = S w / cosh(rho)` and diagnostics.
///
/// Nodes with `sinh rho = 0` get `S = u` without a cone requirement.
pub fn speed_field(graph: &RadialGraph, k: usize) -> Result<SpeedField, GeometryError> {
    evaluate(graph, k, false)
}

/// `cfl h^2 / D_max`, capped by `0.5 / max |rho_t|`.
pub fn choose_dt(graph: &RadialGraph, field: &SpeedField, cfl: f64) -> Result<f64, FlowError> {
    if !field.d_max.is_finite() {
        return Err(FlowError::Stiffness(field.d_max));
    }
    let h = graph.grid().min_spacing();
    let diffusive = if field.d_max > 0.0 {
        cfl * h * h / field.d_max
    } else {
        cfl * h * h
    };
    let rate = field.max_abs_rate();
    let cap = if rate > 0.0 {
        0.5 / rate
    } else {
        f64::INFINITY
    };
    Ok(diffusive.min(cap))
}

fn axpy(rho: &[f64], dt: f64, rate: &[f64]) -> Vec<f64> {
    rho.iter().zip(rate).map(|(r, v)| r + dt * v).collect()
}

fn try_step(
    state: &FlowState,
    field: &SpeedField,
    dt: f64,
    scheme: Scheme,
    k: usize,
) -> Result<(FlowState, SpeedField), GeometryError> {
    let graph = &state.graph;
    let rho = graph.rho();
    let next = match scheme {
        Scheme::Euler => axpy(rho, dt, &field.rho_t),
        Scheme::Rk4 => {
            let stage = |rate: &[f64], h: f64| -> Result<Vec<f64>, GeometryError> {
                let g = graph.with_rho(axpy(rho, h, rate))?;
                Ok(evaluate(&g, k, true)?.rho_t)
            };
            let k1 = &field.rho_t;
            let k2 = stage(k1, 0.5 * dt)?;
            let k3 = stage(&k2, 0.5 * dt)?;
            let k4 = stage(&k3, dt)?;
            (0..rho.len())
                .map(|i| rho[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    let graph = graph.with_rho(next)?;
    let field = evaluate(&graph, k, true)?;
    Ok((
        FlowState {
            t: state.t + dt,
            graph,
            last_dt: dt,
            steps: state.steps + 1,
        },
        field,
    ))
}

/// One explicit step; on a cone or spacelike failure `dt` is halved and
/// the step retried up to [`MAX_HALVINGS`] times.
///
/// `field` must be the speed field of `state`. Returns the new state and
/// its (strictly validated) speed field.
pub fn step(
    state: &FlowState,
    field: &SpeedField,
    dt: f64,
    scheme: Scheme,
    k: usize,
) -> Result<(FlowState, SpeedField), FlowError> {
    let mut dt = dt;
    let mut last = String::new();
    for _ in 0..=MAX_HALVINGS {
        match try_step(state, field, dt, scheme, k) {
            Ok(out) => return Ok(out),
            Err(e) => {
                last = e.to_string();
                dt *= 0.5;
            }
        }
    }
    Err(FlowError::Rejected {
        t: state.t,
        attempts: MAX_HALVINGS + 1,
        last,
    })
}

/// Rate of `A_l` predicted by the evolution formulas:
/// `int S d mu` for `l = -1`, `(l + 1) int S sigma_{l+1} d mu` otherwise.
pub fn predicted_da(graph: &RadialGraph, l: isize, k: usize) -> Result<f64, FlowError> {
    let n = graph.n() as isize;
    if l < -1 || l > n - 1 {
        return Err(FlowError::Config(format!("l = {l} outside -1..={}", n - 1)));
    }
    let pts = geometry_field(graph)?;
    let mut vals = Vec::with_capacity(pts.len());
    for pt in &pts {
        let s = normal_speed(pt, k)?;
        let weight = if l == -1 {
            1.0
        } else {
            (l + 1) as f64 * pt.sigma((l + 1) as usize)
        };
        vals.push(s * weight * pt.area_weight);
    }
    Ok(graph.grid().integrate(&vals))
}

/// One row of the monitor series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    /// `a[m + 1] = A_m`, `m = -1..=n`
    pub a: Vec<f64>,
    pub min_rho: f64,
    pub max_rho: f64,
    pub osc: f64,
    pub max_abs_speed: f64,
    pub max_u: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub max_kappa: f64,
    pub hm_residual_1: f64,
    /// NaN when `A_0` is below the slice minimum
    pub gap: f64,
}

pub fn monitor_record(state: &FlowState, field: &SpeedField) -> Result<MonitorRecord, FlowError> {
    let pts = geometry_field(&state.graph)?;
    let q = quermass_from_points(&state.graph, &pts);
    Ok(MonitorRecord {
        t: state.t,
        dt: state.last_dt,
        steps: state.steps,
        a: q.a,
        min_rho: state.graph.min_rho(),
        max_rho: state.graph.max_rho(),
        osc: state.graph.oscillation(),
        max_abs_speed: field.max_abs_speed,
        max_u: field.max_u,
        min_f: field.min_f,
        max_f: field.max_f,
        max_kappa: field.max_abs_kappa,
        hm_residual_1: q.hm_residual.get(1).copied().unwrap_or(f64::NAN),
        gap: q.gap.unwrap_or(f64::NAN),
    })
}

/// Per-step check of one monotone quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// largest move in the forbidden direction minus the allowed slack
    pub worst_excess: f64,
    pub violations: usize,
}

impl Default for BoundCheck {
    fn default() -> Self {
        Self {
            worst_excess: f64::NEG_INFINITY,
            violations: 0,
        }
    }
}

impl BoundCheck {
    fn record(&mut self, forbidden_move: f64, slack: f64) {
        let excess = forbidden_move - slack;
        self.worst_excess = self.worst_excess.max(excess);
        if excess > 0.0 {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Maximum-principle monitors accumulated over every accepted step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundChecks {
    pub max_rho: BoundCheck,
    pub min_rho: BoundCheck,
    pub max_u: BoundCheck,
    pub min_f: BoundCheck,
    /// `sup_t max F / max F(0)`
    pub max_f_ratio: f64,
    /// `sup_t max |kappa| / max |kappa|(0)`
    pub max_kappa_ratio: f64,
}

impl BoundChecks {
    pub fn passed(&self) -> bool {
        self.max_rho.passed() && self.min_rho.passed() && self.max_u.passed() && self.min_f.passed()
    }
}

/// Per-step slack `1e-8 + 10 dt h^2` for the discrete maximum principles.
pub fn monitor_slack(dt: f64, h: f64) -> f64 {
    1e-8 + 10.0 * dt * h * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    TMax,
    Aborted(String),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Converged => f.write_str("converged"),
            Termination::TMax => f.write_str("t_max"),
            Termination::Aborted(r) => write!(f, "aborted: {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: Termination,
    /// mean radius at convergence
    pub r_infinity: Option<f64>,
    pub steps: usize,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub records: Vec<MonitorRecord>,
    pub bounds: BoundChecks,
    pub final_state: FlowState,
}

pub fn run(config: &FlowConfig, rho0: RadialGraph) -> Result<RunOutput, FlowError> {
    run_with_observer(config, rho0, |_, _| {})
}

/// Integrates until convergence, `t_max`, `max_steps` or an abort.
///
/// `observer` sees every monitor record together with its state. The first
/// and the final state are always recorded.
pub fn run_with_observer(
    config: &FlowConfig,
    rho0: RadialGraph,
    mut observer: impl FnMut(&FlowState, &MonitorRecord),
) -> Result<RunOutput, FlowError> {
    config.validate()?;
    if rho0.n() != config.n {
        return Err(FlowError::Config(format!(
            "grid dimension {} does not match n = {}",
            rho0.n(),
            config.n
        )));
    }
    let k = config.k;
    let report = validate_hypersurface(&rho0, k);
    if !report.passed() {
        let what = if report.spacelike {
            format!(
                "not strictly {k}-convex (min sigma = {:?})",
                report.min_sigma
            )
        } else {
            format!("not spacelike (min w^2 = {})", report.min_w2)
        };
        return Err(FlowError::Precondition(format!(
            "{what}, first failing node {:?}",
            report.first_failure
        )));
    }

    let h = rho0.grid().min_spacing();
    let mut state = FlowState::new(rho0);
    let mut field = evaluate(&state.graph, k, true)?;
    let mut records = Vec::new();
    let mut bounds = BoundChecks {
        max_f_ratio: 1.0,
        max_kappa_ratio: 1.0,
        ..BoundChecks::default()
    };
    let (f0, kappa0) = (field.max_f, field.max_abs_kappa);

    let first = monitor_record(&state, &field)?;
    observer(&state, &first);
    records.push(first);
    let mut recorded_step = 0;

    let termination = loop {
        if state.graph.oscillation() < config.conv_tol && field.max_abs_speed < config.conv_tol {
            break Termination::Converged;
        }
        if state.t >= config.t_max {
            break Termination::TMax;
        }
        if state.steps >= config.max_steps {
            break Termination::Aborted(format!("step limit {} reached", config.max_steps));
        }
        let dt = match choose_dt(&state.graph, &field, config.cfl) {
            Ok(dt) => dt.min(config.t_max - state.t),
            Err(e) => break Termination::Aborted(e.to_string()),
        };
        let (next, next_field) = match step(&state, &field, dt, config.scheme, k) {
            Ok(out) => out,
            Err(e) => break Termination::Aborted(e.to_string()),
        };
        let slack = monitor_slack(next.last_dt, h);
        bounds
            .max_rho
            .record(next.graph.max_rho() - state.graph.max_rho(), slack);
        bounds
            .min_rho
            .record(state.graph.min_rho() - next.graph.min_rho(), slack);
        bounds.max_u.record(next_field.max_u - field.max_u, slack);
        bounds.min_f.record(field.min_f - next_field.min_f, slack);
        bounds.max_f_ratio = bounds.max_f_ratio.max(next_field.max_f / f0);
        if kappa0 > 0.0 {
            bounds.max_kappa_ratio = bounds
                .max_kappa_ratio
                .max(next_field.max_abs_kappa / kappa0);
        }
        state = next;
        field = next_field;
        if state.steps.is_multiple_of(config.monitor_every) {
            let rec = monitor_record(&state, &field)?;
            observer(&state, &rec);
            records.push(rec);
            recorded_step = state.steps;
        }
    };
    if recorded_step != state.steps {
        let rec = monitor_record(&state, &field)?;
        observer(&state, &rec);
        records.push(rec);
    }
    let r_infinity = (termination == Termination::Converged).then(|| state.graph.mean_rho());
    Ok(RunOutput {
        summary: RunSummary {
            termination,
            r_infinity,
            steps: state.steps,
            t: state.t,
        },
        records,
        bounds,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::Grid;

    fn axisym(n: usize, m: usize, f: impl Fn(f64) -> f64) -> RadialGraph {
        RadialGraph::from_fn(Grid::axisym(n, m).unwrap(), |t, _| f(t)).unwrap()
    }

    #[test]
    fn slices_are_stationary() {
        for n in 2..=4 {
            for r in [0.5, 1.0, 1.5] {
                let f = speed_field(&axisym(n, 21, |_| r), 2).unwrap();
                assert!(f.max_abs_rate() < 1e-12, "n={n} r={r}");
                assert!(f.d_max > 0.0);
            }
        }
    }

    #[test]
    fn field_agrees_with_normal_speed() {
        let g = axisym(4, 41, |t| 0.9 + 0.1 * (2.0 * t).cos() + 0.05 * t.cos());
        let field = speed_field(&g, 3).unwrap();
        for (pt, s) in geometry_field(&g).unwrap().iter().zip(&field.speed) {
            let exact = normal_speed(pt, 3).unwrap();
            assert!((exact - s).abs() < 1e-13 * exact.abs().max(1.0));
            let d = crate::symfunc::sym_derivatives(pt.kappa(), 3).unwrap();
            assert!(d.power_value >= field.min_f && d.power_value <= field.max_f);
        }
    }

    #[test]
    fn equator_moves_with_unit_speed() {
        let g = axisym(3, 21, |_| 0.0);
        let f = speed_field(&g, 2).unwrap();
        assert!(f.rho_t.iter().all(|v| *v == 1.0));
        // the result is the slice rho = dt, which is strictly convex
        let (next, _) = step(&FlowState::new(g), &f, 1e-3, Scheme::Euler, 2).unwrap();
        assert!(next.graph.rho().iter().all(|r| *r == 1e-3));
        assert_eq!((next.t, next.steps), (1e-3, 1));
    }

    #[test]
    fn dt_scales_with_cfl_and_h_squared() {
        let dt = |m: usize, cfl: f64| {
            let g = axisym(3, m, |_| 1.0);
            let f = speed_field(&g, 2).unwrap();
            choose_dt(&g, &f, cfl).unwrap()
        };
        assert!((dt(201, 0.2) / dt(201, 0.1) - 2.0).abs() < 1e-12);
        let slope = (dt(101, 0.2) / dt(201, 0.2)).log2();
        assert!((slope - 2.0).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::new(3, 2).validate().is_ok());
        assert!(FlowConfig::new(3, 1).validate().is_err());
        assert!(FlowConfig::new(3, 4).validate().is_err());
        let mut c = FlowConfig::new(3, 2);
        c.cfl = 1.5;
        assert!(c.validate().is_err());
        assert_eq!("rk4".parse::<Scheme>().unwrap(), Scheme::Rk4);
        assert!("rk2".parse::<Scheme>().is_err());
    }

    #[test]
    fn slice_run_converges_immediately() {
        let out = run(&FlowConfig::new(3, 2), axisym(3, 41, |_| 1.0)).unwrap();
        assert_eq!(out.summary.termination, Termination::Converged);
        assert_eq!(out.summary.steps, 0);
        assert!((out.summary.r_infinity.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn non_convex_start_is_rejected() {
        let err = run(&FlowConfig::new(3, 2), axisym(3, 41, |_| 0.0)).unwrap_err();
        assert!(matches!(err, FlowError::Precondition(_)));
    }

    #[test]
    fn predicted_rates_vanish_on_slices() {
        let g = axisym(3, 41, |_| 0.9);
        for l in -1..=2 {
            assert!(predicted_da(&g, l, 2).unwrap().abs() < 1e-12);
        }
        assert!(predicted_da(&g, 3, 2).is_err());
    }
}
