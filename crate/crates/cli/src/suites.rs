//! The verification suites behind `hidaprop verify`.

use crate::simplex::simplex_quadrature;
use clap::ValueEnum;
use hidaprop::oracle::{cross_validate, CrossConfig, InitialState, WavePacket};
use hidaprop::series::{
    bound_mn, continuity_probe, integral_equation_residual, propagate_to_order, simplex_gamma_integral,
    truncation_order, SeriesConfig, Source,
};
use hidaprop::transforms::{check_order_two_bound, ray_taylor, st_relation_check, UFunctional};
use hidaprop::{Complex64, Result, SignedMeasure, SpaceTimePoint, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `|Kₙ| ≤ Mₙ` on the collocation grid, orders up to 8.
    Bounds,
    /// Residual of the integral equation at 20 probes.
    IntegralEq,
    /// Series-evolved packet against Crank–Nicolson with mollified atoms.
    Schrodinger,
    /// Closed-form simplex integral against nested quadrature.
    Simplex,
    /// Transform catalog, S/T relation, ray analyticity and growth bound.
    Transforms,
    /// Space-time continuity estimate of the summed kernel.
    Continuity,
}

impl Suite {
    pub fn run(self, seed: u64) -> Result<SuiteReport> {
        let (checks, metrics) = match self {
            Self::Bounds => (bounds()?, Vec::new()),
            Self::IntegralEq => integral_eq()?,
            Self::Schrodinger => schrodinger()?,
            Self::Simplex => (simplex()?, Vec::new()),
            Self::Transforms => (transforms(seed)?, Vec::new()),
            Self::Continuity => continuity()?,
        };
        Ok(SuiteReport { suite: self, passed: checks.iter().all(|c| c.passed), checks, metrics })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// `measured` is 1 when the property holds.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, limit, relation: Relation::AtMost, passed: measured <= limit }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, limit, relation: Relation::AtLeast, passed: measured >= limit }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), measured: f64::from(u8::from(ok)), limit: 1.0, relation: Relation::Holds, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Values reported alongside the checks without a verdict.
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

fn metric(name: impl Into<String>, value: f64) -> Metric {
    Metric { name: name.into(), value }
}

fn pt(x: f64, t: f64) -> SpaceTimePoint {
    SpaceTimePoint { x, t }
}

fn series_config(nodes: usize) -> SeriesConfig {
    SeriesConfig { nodes, max_order: 60, horizon: Some(1.0) }
}

/// Relative slack allowed in `|Kₙ| ≤ Mₙ` for rounding.
pub const BOUND_SLACK: f64 = 1e-12;

fn bounds() -> Result<Vec<Check>> {
    let v = SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0))?;
    let xi = TestFunction::zero();
    let targets: Vec<_> = (0..9).map(|j| pt(-0.4 + 0.1 * j as f64, 1.0)).collect();
    let run = propagate_to_order(&v, &xi, Source::Point(pt(0.25, 0.0)), &targets, 8, &series_config(48))?;
    let mut checks: Vec<Check> = run
        .bound_checks
        .iter()
        .skip(1)
        .map(|b| Check::at_most(format!("order {} grid max |K_n|/M_n", b.order), b.max_ratio, 1.0 + BOUND_SLACK))
        .collect();
    for n in 1..=8 {
        let worst = run.terms[n].iter().map(|k| k.norm()).fold(0.0, f64::max) / run.bounds[n];
        checks.push(Check::at_most(format!("order {n} target max |K_n|/M_n"), worst, 1.0 + BOUND_SLACK));
    }
    Ok(checks)
}

/// Tolerance of the series whose residual is measured.
pub const INTEGRAL_EQ_TOL: f64 = 1e-6;
/// Panel order of the residual's time quadrature; the self-error halves it.
pub const RESIDUAL_NODES: usize = 16;

fn integral_eq() -> Result<(Vec<Check>, Vec<Metric>)> {
    let v = SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0))?;
    let xi = TestFunction::zero();
    let source = pt(0.0, 0.0);
    let probes: Vec<_> = (1..=20).map(|j| pt(0.15 * ((j % 5) as f64 - 2.0), j as f64 / 20.0)).collect();
    let order = truncation_order(INTEGRAL_EQ_TOL, v.vt_inf(), v.window_len(), 60)?;
    let (v, xi) = (&v, &xi);
    let sum_at = |nodes: usize| {
        move |pts: &[SpaceTimePoint]| propagate_to_order(v, xi, Source::Point(source), pts, order, &series_config(nodes)).map(|r| r.values)
    };
    let (coarse, fine) = (sum_at(32), sum_at(64));
    let (a, b) = (coarse(&probes)?, fine(&probes)?);
    let series_self = a.iter().zip(&b).map(|(a, b)| (a - b).norm() / b.norm()).fold(0.0, f64::max);
    let report = integral_equation_residual(&fine, v, xi, source, &probes, RESIDUAL_NODES)?;
    let halved = integral_equation_residual(&fine, v, xi, source, &probes, RESIDUAL_NODES / 2)?;
    let rule_self = report
        .probes
        .iter()
        .zip(&halved.probes)
        .map(|(r, h)| (r.residual - h.residual).norm() / r.value.norm())
        .fold(0.0, f64::max);
    let self_err = series_self.max(rule_self);
    let allowed = (10.0 * INTEGRAL_EQ_TOL).max(5.0 * self_err);
    Ok((
        vec![Check::at_most("max relative residual", report.max_relative, allowed)],
        vec![
            metric("series order", order as f64),
            metric("series node-doubling self-error", series_self),
            metric("residual quadrature self-error", rule_self),
            metric("max absolute residual", report.max_abs),
        ],
    ))
}

/// Resolutions for the packet comparison.
pub fn schrodinger_config() -> CrossConfig {
    CrossConfig {
        half_width: 36.0,
        compare_half_width: 12.0,
        cn_dx: 0.005,
        cn_dt: 5e-4,
        stride: 8,
        series_tol: 1e-10,
        series: SeriesConfig { nodes: 64, max_order: 60, horizon: None },
    }
}

pub const SCHRODINGER_EPSILONS: [f64; 3] = [0.2, 0.1, 0.05];
pub const SCHRODINGER_TOL: f64 = 5e-3;
pub const SELF_CONVERGENCE_TOL: f64 = 1e-3;

fn schrodinger() -> Result<(Vec<Check>, Vec<Metric>)> {
    let psi0 = InitialState::Gaussian(WavePacket::new(-1.0, 1.0, 1.0)?);
    let v = SignedMeasure::single_static(0.25, 0.0, (0.0, 1.0))?;
    let r = cross_validate(&psi0, &v, &TestFunction::zero(), 0.0, 1.0, &SCHRODINGER_EPSILONS, &schrodinger_config())?;
    let mut checks = vec![Check::at_most("extrapolated L2 difference", r.extrapolated_l2_diff, SCHRODINGER_TOL)];
    let mut metrics = Vec::new();
    for e in &r.entries {
        checks.push(Check::at_most(format!("eps {} grid-solver self-error", e.epsilon), e.cn_self_err, SELF_CONVERGENCE_TOL));
        metrics.push(metric(format!("eps {} L2 difference", e.epsilon), e.l2_diff));
    }
    checks.push(Check::at_most("series self-error", r.series_self_err, SELF_CONVERGENCE_TOL));
    metrics.push(metric("fitted slope in eps", r.fitted_slope));
    metrics.push(metric("series tail (L2)", r.entries[0].series_tail));
    Ok((checks, metrics))
}

pub const SIMPLEX_TOL: f64 = 1e-6;

fn simplex() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=3 {
        for alpha in [0.0, 0.3, 0.5] {
            let closed = simplex_gamma_integral(n, alpha, (0.0, 1.0))?;
            let nested = simplex_quadrature(n, alpha, 1.0, 1e-12);
            checks.push(Check::at_most(format!("n = {n}, alpha = {alpha}"), (closed - nested).abs() / closed, SIMPLEX_TOL));
        }
    }
    Ok(checks)
}

/// A random test function: a bump or a clamped spline through random values.
pub fn random_test_function(rng: &mut impl Rng) -> Result<TestFunction> {
    if rng.random_bool(0.5) {
        TestFunction::bump(rng.random_range(0.0..1.5), rng.random_range(0.1..0.8), rng.random_range(-2.0..2.0))
    } else {
        let start = rng.random_range(-0.5..1.0);
        let len = rng.random_range(0.5..2.0);
        let knots: Vec<f64> = (0..6).map(|j| start + len * j as f64 / 5.0).collect();
        let values: Vec<f64> = (0..6).map(|j| if j == 0 || j == 5 { 0.0 } else { rng.random_range(-1.5..1.5) }).collect();
        TestFunction::clamped_spline(&knots, &values)
    }
}

pub const CATALOG_TOL: f64 = 1e-12;
pub const ST_SAMPLES: usize = 100;

fn transforms(seed: u64) -> Result<Vec<Check>> {
    let mut checks = catalog_checks(seed)?;
    checks.extend(ray_checks()?);
    checks.extend(growth_checks()?);
    Ok(checks)
}

/// Closed-form catalog values and `T = C·S(i·)` over random directions.
pub fn catalog_checks(seed: u64) -> Result<Vec<Check>> {
    let zero = TestFunction::zero();
    let one = Complex64::new(1.0, 0.0);
    let mut checks = Vec::new();

    // closed-form examples
    let donsker0 = UFunctional::donsker(0.0, 1.0)?.s_at(&zero, one);
    checks.push(Check::at_most("donsker a=0 t=1", (donsker0 - 0.398_942_280_401_432_7).norm(), CATALOG_TOL));
    let donsker1 = UFunctional::donsker(1.0, 1.0)?.s_at(&zero, one);
    checks.push(Check::at_most("donsker a=1 t=1", (donsker1 - 0.241_970_724_519_143_37).norm(), CATALOG_TOL));
    let bump = TestFunction::bump(0.5, 0.4, 1.0)?;
    let unit = TestFunction::bump(0.5, 0.4, 1.0 / bump.l2_norm_sq(0.0, 1.0).sqrt())?;
    let half = UFunctional::normexp(Complex64::new(-0.5, 0.0), (0.0, 1.0))?.s_at(&unit, one);
    checks.push(Check::at_most("normexp c=-1/2", (half - (-0.25f64).exp()).norm(), CATALOG_TOL));
    let kinetic = UFunctional::normexp(Complex64::new(0.5, 0.5), (0.0, 1.0))?.s_at(&unit, one);
    checks.push(Check::at_most("normexp c=(1+i)/2", (kinetic - Complex64::new(-0.5, 0.5).exp()).norm(), CATALOG_TOL));

    // T = C·S(i·) over random directions
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..ST_SAMPLES {
        let xi = random_test_function(&mut rng)?;
        let t = rng.random_range(0.3..2.0);
        let fs = [
            UFunctional::donsker(rng.random_range(-1.0..1.0), t)?,
            UFunctional::normexp(Complex64::new(rng.random_range(-1.0..0.4), 0.0), (0.0, t))?,
            UFunctional::i0delta(pt(rng.random_range(-1.0..1.0), t), pt(rng.random_range(-1.0..1.0), 0.0))?,
        ];
        for (w, f) in worst.iter_mut().zip(&fs) {
            let r = st_relation_check(f, &xi);
            *w = w.max(r.difference / r.t_value.norm().max(1.0));
        }
    }
    for (name, w) in ["donsker", "normexp", "i0delta"].iter().zip(worst) {
        checks.push(Check::at_most(format!("{name}: T = C S(i.) over {ST_SAMPLES} directions"), w, CATALOG_TOL));
    }

    Ok(checks)
}

fn rays() -> Result<[TestFunction; 2]> {
    Ok([TestFunction::bump(0.5, 0.4, 1.0)?, TestFunction::bump(0.3, 0.2, -2.0)?])
}

fn catalog() -> Result<[UFunctional; 3]> {
    Ok([
        UFunctional::i0delta(pt(0.2, 1.0), pt(0.0, 0.0))?,
        UFunctional::donsker(0.4, 1.0)?,
        UFunctional::normexp(Complex64::new(-0.7, 0.0), (0.0, 1.0))?,
    ])
}

/// Factorial decay of the Taylor coefficients along a ray.
pub fn ray_checks() -> Result<Vec<Check>> {
    let ray = &rays()?[0];
    catalog()?
        .iter()
        .map(|f| Ok(Check::holds(format!("{}: entire along rays", f.name()), ray_taylor(f, f.native(), ray, 1.5, 32)?.decays_factorially())))
        .collect()
}

/// The fitted order-two bound holds for the catalog and fails for cubic growth.
pub fn growth_checks() -> Result<Vec<Check>> {
    let rays = rays()?;
    let mut checks = Vec::new();
    for f in &catalog()? {
        let g = check_order_two_bound(f, &rays, 4.0, 0)?;
        checks.push(Check::holds(format!("{}: order-two bound (Q = {:.4})", f.name(), g.q_const), g.passed));
    }
    let cubic = check_order_two_bound(&UFunctional::cubic_exp((0.0, 1.0))?, &rays, 4.0, 0)?;
    checks.push(Check::holds("cubicexp: order-two bound rejected", !cubic.passed));
    Ok(checks)
}

/// Constants of the continuity estimate, frozen for this configuration.
pub const CONTINUITY: (f64, f64, f64) = (2.0, 0.5, 0.45);

fn continuity() -> Result<(Vec<Check>, Vec<Metric>)> {
    let v = SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0))?;
    let xi = TestFunction::zero();
    let eval = |pts: &[SpaceTimePoint]| {
        propagate_to_order(&v, &xi, Source::Point(pt(0.25, 0.0)), pts, 6, &series_config(32)).map(|r| r.values)
    };
    let pairs: Vec<_> = [(0.1, 0.6), (-0.2, 0.8), (0.3, 0.95), (0.0, 0.4)]
        .iter()
        .flat_map(|&(x, t)| [(pt(x, t), pt(x + 1e-3, t)), (pt(x, t), pt(x, t + 1e-3)), (pt(x, t), pt(x - 2e-3, t + 2e-3))])
        .collect();
    let (cx, ct, alpha) = CONTINUITY;
    let report = continuity_probe(&eval, &pairs, cx, ct, alpha)?;
    let m7 = bound_mn(7, v.vt_inf(), v.window_len())?;
    Ok((vec![Check::at_most("max difference / allowance", report.max_ratio, 1.0)], vec![metric("M_7", m7)]))
}
