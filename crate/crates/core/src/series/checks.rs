//! Independent checks on computed propagators and CSV export.

use super::{bound_m0, Propagation};
use crate::error::{Error, Result};
use crate::freeprop::k0;
use crate::kernel::SpaceTimePoint;
use crate::measure::SignedMeasure;
use crate::numeric::{ComplexSum, I};
use crate::quadrature::fresnel_end_rule;
use crate::testfn::TestFunction;
use num_complex::Complex64;
use std::io::Write;

/// A batch evaluator of the propagator being checked.
pub type Evaluator<'a> = dyn Fn(&[SpaceTimePoint]) -> Result<Vec<Complex64>> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualProbe {
    pub point: SpaceTimePoint,
    pub value: Complex64,
    pub residual: Complex64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEquationReport {
    pub probes: Vec<ResidualProbe>,
    pub max_abs: f64,
    pub max_relative: f64,
}

/// `K − K₀ + i Σ_k w_k ∫ f K₀(x,t|a_k(τ),τ) K(a_k(τ),τ) dτ` at each probe.
///
/// The time integral is split at its midpoint and each half integrated with
/// [`fresnel_end_rule`] of order `nodes` toward its end: the target end
/// carries the phase `(x − a_k(t))²/2(t − τ)` of the free kernel and the
/// source end that of `K` itself, `(a_k(t₀) − x₀)²/2(τ − t₀)`. Jumps of `f`
/// and kinks of the paths become panel ends. The rule shares no nodes with
/// the series engine.
pub fn integral_equation_residual(
    k: &Evaluator<'_>,
    v: &SignedMeasure,
    xi: &TestFunction,
    source: SpaceTimePoint,
    probes: &[SpaceTimePoint],
    nodes: usize,
) -> Result<IntegralEquationReport> {
    let t0 = source.t;
    if let Some(p) = probes.iter().find(|p| !(p.t > t0)) {
        return Err(Error::InvalidParameter(format!("probe ({}, {}) is outside the causal region t > {t0}", p.x, p.t)));
    }
    // (atom, weight·f) per evaluation point, probe by probe
    let mut plan: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(probes.len());
    let mut points: Vec<SpaceTimePoint> = probes.to_vec();
    for p in probes {
        let half = 0.5 * (p.t - t0);
        let breaks = v.breakpoints_in(t0, p.t);
        let mut rows = Vec::new();
        for (k, atom) in v.atoms().iter().enumerate() {
            let ends = [
                (0.5 * (p.x - atom.path.position(p.t)).powi(2), -1.0, p.t),
                (0.5 * (atom.path.position(t0) - source.x).powi(2), 1.0, t0),
            ];
            for (c, dir, origin) in ends {
                let cuts: Vec<f64> = breaks.iter().map(|&b| dir * (b - origin)).collect();
                for (u, wt) in fresnel_end_rule(c, half, nodes, &cuts)? {
                    let tau = origin + dir * u;
                    let f = v.f(tau);
                    if f != 0.0 {
                        rows.push((k, wt * f));
                        points.push(SpaceTimePoint { x: atom.path.position(tau), t: tau });
                    }
                }
            }
        }
        plan.push(rows);
    }
    let values = k(&points)?;
    if values.len() != points.len() {
        return Err(Error::InvalidParameter("evaluator returned the wrong number of values".into()));
    }
    let mut cursor = probes.len();
    let mut out = Vec::with_capacity(probes.len());
    for (j, p) in probes.iter().enumerate() {
        let mut acc = ComplexSum::default();
        for &(k, wt) in &plan[j] {
            let (y, kv) = (points[cursor], values[cursor]);
            cursor += 1;
            acc.add(v.atoms()[k].weight * wt * k0(xi, *p, y)? * kv);
        }
        let value = values[j];
        let residual = value - k0(xi, *p, source)? + I * acc.value();
        let relative = if value.norm() > 0.0 { residual.norm() / value.norm() } else { residual.norm() };
        out.push(ResidualProbe { point: *p, value, residual, relative });
    }
    let max_abs = out.iter().map(|r| r.residual.norm()).fold(0.0, f64::max);
    let max_relative = out.iter().map(|r| r.relative).fold(0.0, f64::max);
    Ok(IntegralEquationReport { probes: out, max_abs, max_relative })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    /// `|K(p′) − K(p)|` per pair.
    pub differences: Vec<f64>,
    /// `C_x|x − x′| + C_t|t − t′|^α` per pair.
    pub allowances: Vec<f64>,
    /// Largest difference/allowance ratio; at most 1 when the estimate holds.
    pub max_ratio: f64,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// Check `|K(x′,t′) − K(x,t)| ≤ C_x|x − x′| + C_t|t − t′|^α` on sampled pairs.
pub fn continuity_probe(
    k: &Evaluator<'_>,
    pairs: &[(SpaceTimePoint, SpaceTimePoint)],
    c_x: f64,
    c_t: f64,
    alpha: f64,
) -> Result<ContinuityReport> {
    let pts: Vec<SpaceTimePoint> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let vals = k(&pts)?;
    let mut differences = Vec::with_capacity(pairs.len());
    let mut allowances = Vec::with_capacity(pairs.len());
    let mut max_ratio: f64 = 0.0;
    for (j, (a, b)) in pairs.iter().enumerate() {
        let d = (vals[2 * j + 1] - vals[2 * j]).norm();
        let allow = c_x * (a.x - b.x).abs() + c_t * (a.t - b.t).abs().powf(alpha);
        max_ratio = max_ratio.max(if allow > 0.0 { d / allow } else if d > 0.0 { f64::INFINITY } else { 0.0 });
        differences.push(d);
        allowances.push(allow);
    }
    Ok(ContinuityReport { differences, allowances, max_ratio })
}

/// One row per order and target: `order,x,t,re,im,M_n,tail_bound`, where
/// `re, im` are the term `K_n` and `M₀` is taken at the target's own time.
/// Reals carry 17 significant digits.
pub fn write_csv<W: Write>(mut out: W, run: &Propagation, t0: f64) -> std::io::Result<()> {
    writeln!(out, "order,x,t,re,im,M_n,tail_bound")?;
    for (n, terms) in run.terms.iter().enumerate() {
        for (p, val) in run.targets.iter().zip(terms) {
            let m = if n == 0 { bound_m0(p.t - t0) } else { run.bounds[n] };
            writeln!(out, "{n},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.t, val.re, val.im, m, run.tails[n])?;
        }
    }
    Ok(())
}
