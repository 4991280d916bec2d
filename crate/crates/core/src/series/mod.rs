//! Perturbation series `K = Σ Kₙ` for the propagator in an atomic potential,
//! built order by order from
//!
//! ```text
//! Kₙ(x,t|x₀,t₀) = −i Σ_k w_k ∫ f(τ) K₀(x,t|a_k(τ),τ) K_{n−1}(a_k(τ),τ|x₀,t₀) dτ
//! ```
//!
//! Each order is tabulated on the atoms at collocation times, which is all
//! the next order needs. Truncation uses the certified bounds `Mₙ`.

pub mod bounds;
mod checks;
mod engine;
pub mod grid;

pub use bounds::{bound_m0, bound_mn, simplex_gamma_integral, tail_bound, truncation_order};
pub use checks::{
    continuity_probe, integral_equation_residual, write_csv, ContinuityReport, IntegralEquationReport, ResidualProbe,
};
pub use grid::TimeGrid;

use crate::error::{Error, Result};
use crate::freeprop;
use crate::kernel::{GaussianKernel, SpaceTimePoint};
use crate::measure::{validate_measure, Holder, SignedMeasure};
use crate::testfn::TestFunction;
use engine::{Engine, Prev};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Where the propagation starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// `K(·,·|x₀,t₀)` itself.
    Point(SpaceTimePoint),
    /// `∫ K(·,·|x₀,t₀) ψ₀(x₀) dx₀` for a Gaussian `ψ₀(x₀) = profile.eval(x₀, ·)`.
    Packet { t0: f64, profile: GaussianKernel },
}

impl Source {
    pub fn t0(&self) -> f64 {
        match self {
            Source::Point(p) => p.t,
            Source::Packet { t0, .. } => *t0,
        }
    }

    /// The zeroth-order term at `p`.
    pub fn free_term(&self, xi: &TestFunction, p: SpaceTimePoint) -> Result<Complex64> {
        match self {
            Source::Point(s) => freeprop::k0(xi, p, *s),
            Source::Packet { t0, profile } => {
                if p.t < *t0 {
                    Ok(Complex64::new(0.0, 0.0))
                } else if p.t == *t0 {
                    Ok(profile.eval(p.x, 0.0))
                } else {
                    Ok(freeprop::kernel(xi, *t0, p.t).compose(profile)?.eval(p.x, 0.0))
                }
            }
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Source::Point(p) => SpaceTimePoint::new(p.x, p.t).map(|_| ()),
            Source::Packet { t0, profile } => {
                if !t0.is_finite() {
                    return Err(Error::NonFinite(format!("packet start time {t0}")));
                }
                if !(profile.alpha.im > 0.0) || profile.beta.norm() != 0.0 || profile.gamma.norm() != 0.0 {
                    return Err(Error::Unsupported("packet profile must be a normalisable Gaussian in x alone".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Steps in `√(τ − t₀)` of the collocation grid (breakpoints are added).
    pub nodes: usize,
    /// Highest order attempted before a truncation report.
    pub max_order: usize,
    /// Grid end; defaults to the latest target time, or the window end.
    pub horizon: Option<f64>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { nodes: 64, max_order: 60, horizon: None }
    }
}

/// One order of the series.
#[derive(Debug, Clone)]
pub struct SeriesState {
    pub order: usize,
    /// Collocation times `τ_m`.
    pub times: Vec<f64>,
    /// `values[k][m] = Kₙ(a_k(τ_m), τ_m)`; zero at `τ_m = t₀`.
    pub values: Vec<Vec<Complex64>>,
    pub targets: Vec<SpaceTimePoint>,
    pub target_values: Vec<Complex64>,
    /// `M₀..Mₙ`, with `M₀` taken at the grid horizon.
    pub bounds: Vec<f64>,
    /// `Σ_{m>n} M_m`.
    pub tail_bound: f64,
    source: Source,
    grid: Arc<TimeGrid>,
    stored: Vec<Vec<Complex64>>,
}

/// Largest `|Kₙ|/Mₙ` over the collocation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub order: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Relative slack for `|Kₙ| ≤ Mₙ`; `|K₀| = M₀` holds with equality.
const BOUND_SLACK: f64 = 1e-12;

impl SeriesState {
    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `|Kₙ| ≤ Mₙ` on every collocation entry (`M₀` per node time).
    pub fn bound_check(&self, v: &SignedMeasure) -> BoundCheck {
        let t0 = self.grid.t0();
        let mn = if self.order == 0 { None } else { Some(bound_mn(self.order, v.vt_inf(), v.window_len()).unwrap_or(f64::INFINITY)) };
        let mut max_ratio: f64 = 0.0;
        let mut violations = 0;
        for row in &self.values {
            for (&tau, val) in self.times.iter().zip(row).skip(1) {
                let m = mn.unwrap_or_else(|| bound_m0(tau - t0));
                let ratio = val.norm() / m;
                if ratio.is_nan() || ratio > 1.0 + BOUND_SLACK {
                    violations += 1;
                }
                max_ratio = max_ratio.max(ratio);
            }
        }
        BoundCheck { order: self.order, max_ratio, violations }
    }

    /// The next order `K_{n+1}` at arbitrary points.
    pub fn next_term_at(&self, v: &SignedMeasure, xi: &TestFunction, points: &[SpaceTimePoint]) -> Result<Vec<Complex64>> {
        let engine = Engine::new(v, xi, &self.source, &self.grid);
        let prev = self.prev();
        points
            .par_iter()
            .map(|p| finite(engine.eval(prev, p.x, p.t), || format!("order {} at ({}, {})", self.order + 1, p.x, p.t)))
            .collect()
    }

    fn prev(&self) -> Prev<'_> {
        if self.order == 0 {
            Prev::Free
        } else {
            Prev::Table(&self.stored)
        }
    }
}

fn finite(z: Complex64, at: impl FnOnce() -> String) -> Result<Complex64> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(at()))
    }
}

/// Order zero on the collocation grid and at the targets.
pub fn series_start(
    v: &SignedMeasure,
    xi: &TestFunction,
    source: Source,
    targets: &[SpaceTimePoint],
    config: &SeriesConfig,
) -> Result<SeriesState> {
    source.check()?;
    let t0 = source.t0();
    let latest = targets.iter().map(|p| p.t).fold(f64::NEG_INFINITY, f64::max);
    let horizon = config.horizon.unwrap_or(if latest > t0 { latest } else { v.window().1 });
    if !(horizon > t0) {
        return Err(Error::InvalidParameter(format!("grid horizon {horizon} must exceed the source time {t0}")));
    }
    let grid = TimeGrid::new(t0, horizon, config.nodes, &v.breakpoints_in(t0, horizon))?;
    let values = v
        .atoms()
        .iter()
        .map(|a| {
            grid.tau()
                .iter()
                .map(|&tau| {
                    if tau == t0 {
                        Ok(Complex64::new(0.0, 0.0))
                    } else {
                        source.free_term(xi, SpaceTimePoint { x: a.path.position(tau), t: tau })
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let target_values = targets.iter().map(|&p| source.free_term(xi, p)).collect::<Result<Vec<_>>>()?;
    Ok(SeriesState {
        order: 0,
        times: grid.tau().to_vec(),
        values,
        targets: targets.to_vec(),
        target_values,
        bounds: vec![bound_m0(horizon - t0)],
        tail_bound: tail_bound(0, v.vt_inf(), v.window_len()),
        source,
        grid: Arc::new(grid),
        stored: Vec::new(),
    })
}

/// Order `n` from order `n − 1`.
pub fn series_step(prev: &SeriesState, v: &SignedMeasure, xi: &TestFunction) -> Result<SeriesState> {
    let order = prev.order + 1;
    let engine = Engine::new(v, xi, &prev.source, &prev.grid);
    if engine.atom_count() != prev.values.len() {
        return Err(Error::InvalidParameter("measure does not match the series state".into()));
    }
    let from = prev.prev();
    let grid = &prev.grid;
    let t0 = grid.t0();
    let tasks: Vec<(usize, usize)> =
        (0..engine.atom_count()).flat_map(|k| (0..grid.len()).map(move |m| (k, m))).collect();
    let flat: Vec<Complex64> = tasks
        .par_iter()
        .map(|&(k, m)| {
            let tau = grid.tau()[m];
            if tau == t0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let y = v.atoms()[k].path.position(tau);
            finite(engine.eval(from, y, tau), || format!("order {order}, atom {k}, node {m} (tau = {tau})"))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(engine.atom_count());
    let mut stored = Vec::with_capacity(engine.atom_count());
    for (k, row) in flat.chunks(grid.len()).enumerate() {
        stored.push(row.iter().zip(grid.tau()).map(|(&val, &tau)| engine.to_stored(k, tau, val)).collect());
        values.push(row.to_vec());
    }
    let target_values = prev.next_term_at(v, xi, &prev.targets)?;
    let mut bounds = prev.bounds.clone();
    bounds.push(bound_mn(order, v.vt_inf(), v.window_len())?);
    Ok(SeriesState {
        order,
        times: prev.times.clone(),
        values,
        targets: prev.targets.clone(),
        target_values,
        bounds,
        tail_bound: tail_bound(order, v.vt_inf(), v.window_len()),
        source: prev.source.clone(),
        grid: Arc::clone(&prev.grid),
        stored,
    })
}

/// A truncated series evaluated at a set of targets.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub targets: Vec<SpaceTimePoint>,
    /// Partial sums `Σ_{m≤n} K_m` at the targets.
    pub values: Vec<Complex64>,
    /// `terms[m][j] = K_m(targets[j])`.
    pub terms: Vec<Vec<Complex64>>,
    pub order: usize,
    /// `M₀..Mₙ`.
    pub bounds: Vec<f64>,
    /// Certified truncation error `Σ_{m>n} M_m`.
    pub error_bound: f64,
    /// `Σ_{m>j} M_m` after each computed order `j`.
    pub tails: Vec<f64>,
    /// `|K_m| ≤ M_m` on the collocation grid, per computed order.
    pub bound_checks: Vec<BoundCheck>,
    /// Final state, for evaluating further orders.
    pub state: SeriesState,
}

impl Propagation {
    pub fn bounds_hold(&self) -> bool {
        self.bound_checks.iter().all(BoundCheck::passed)
    }
}

fn check_request(v: &SignedMeasure, source: &Source, targets: &[SpaceTimePoint]) -> Result<()> {
    let (a, b) = v.window();
    let inside = |t: f64| t >= a && t <= b;
    if !inside(source.t0()) {
        return Err(Error::InvalidParameter(format!("source time {} outside the window [{a}, {b}]", source.t0())));
    }
    if let Some(p) = targets.iter().find(|p| !inside(p.t)) {
        return Err(Error::InvalidParameter(format!("target time {} outside the window [{a}, {b}]", p.t)));
    }
    let report = validate_measure(v, Holder::for_decay(v.decay()))?;
    if !report.passed() {
        return Err(Error::NotAdmissible(format!(
            "condition i) {} ({} violations), condition ii) {}",
            if report.condition_i { "holds" } else { "fails" },
            report.violations.len(),
            if report.condition_ii { "holds" } else { "fails" }
        )));
    }
    Ok(())
}

/// Sum the series at every target up to the first order whose certified
/// tail is below `tol`.
pub fn propagate_many(
    v: &SignedMeasure,
    xi: &TestFunction,
    source: Source,
    targets: &[SpaceTimePoint],
    tol: f64,
    config: &SeriesConfig,
) -> Result<Propagation> {
    check_request(v, &source, targets)?;
    let order = if v.is_null() { 0 } else { truncation_order(tol, v.vt_inf(), v.window_len(), config.max_order)? };
    propagate_to_order(v, xi, source, targets, order, config)
}

/// Sum the series through a fixed `order`, reporting the tail beyond it.
pub fn propagate_to_order(
    v: &SignedMeasure,
    xi: &TestFunction,
    source: Source,
    targets: &[SpaceTimePoint],
    order: usize,
    config: &SeriesConfig,
) -> Result<Propagation> {
    let mut state = series_start(v, xi, source, targets, config)?;
    let mut values = state.target_values.clone();
    let mut terms = vec![state.target_values.clone()];
    let mut bound_checks = vec![state.bound_check(v)];
    let null = v.is_null();
    let tail = |n: usize| if null { 0.0 } else { tail_bound(n, v.vt_inf(), v.window_len()) };
    let mut tails = vec![tail(0)];
    for _ in 0..order {
        if null {
            break;
        }
        state = series_step(&state, v, xi)?;
        for (acc, t) in values.iter_mut().zip(&state.target_values) {
            *acc += t;
        }
        terms.push(state.target_values.clone());
        bound_checks.push(state.bound_check(v));
        tails.push(tail(state.order));
    }
    let error_bound = if null { 0.0 } else { state.tail_bound };
    Ok(Propagation {
        targets: targets.to_vec(),
        values,
        terms,
        order: state.order,
        bounds: state.bounds.clone(),
        error_bound,
        tails,
        bound_checks,
        state,
    })
}

/// `K(x,t|x₀,t₀)` with its certified truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorValue {
    pub value: Complex64,
    pub error_bound: f64,
    pub order: usize,
}

pub fn propagator(
    v: &SignedMeasure,
    xi: &TestFunction,
    target: SpaceTimePoint,
    source: SpaceTimePoint,
    tol: f64,
    config: &SeriesConfig,
) -> Result<PropagatorValue> {
    let run = propagate_many(v, xi, Source::Point(source), &[target], tol, config)?;
    Ok(PropagatorValue { value: run.values[0], error_bound: run.error_bound, order: run.order })
}
