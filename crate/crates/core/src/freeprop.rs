//! The free propagator in the driving field `ξ̇(t)x`.
//!
//! With `T = t − t₀`, `I = ∫_{t₀}^t ξ` and `L = ∫_{t₀}^t ξ²`,
//!
//! ```text
//! K₀(x,t|x₀,t₀) = θ(T)/√(2πiT) · exp(i[x₀ξ(t₀) − xξ(t) − L/2 + (I + x − x₀)²/(2T)])
//! ```
//!
//! solves `(i∂_t + ½∂_x² − ξ̇(t)x) K₀ = iδ(t − t₀)δ(x − x₀)`.

use crate::error::{Error, Result};
use crate::kernel::{GaussianKernel, SpaceTimePoint};
use crate::numeric::{inv_sqrt_2pi_i, I};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use serde::Serialize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `K₀` evaluated directly from its closed form.
pub fn k0(xi: &TestFunction, target: SpaceTimePoint, source: SpaceTimePoint) -> Result<Complex64> {
    let span = target.t - source.t;
    if span <= 0.0 {
        if span == 0.0 && target.x == source.x {
            return Err(Error::Singular { x: target.x, t: target.t });
        }
        return Ok(ZERO);
    }
    let drift = xi.integral(source.t, target.t);
    let energy = xi.l2_norm_sq(source.t, target.t);
    let d = drift + target.x - source.x;
    let phase = source.x * xi.value(source.t) - target.x * xi.value(target.t) - 0.5 * energy
        + d * d / (2.0 * span);
    Ok(inv_sqrt_2pi_i(span) * (I * phase).exp())
}

/// `K₀(·,t|·,t₀)` as a [`GaussianKernel`] for the driving function `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenFreePropagator {
    pub xi: TestFunction,
}

impl DrivenFreePropagator {
    pub fn new(xi: TestFunction) -> Self {
        Self { xi }
    }

    pub fn kernel(&self, t0: f64, t: f64) -> GaussianKernel {
        kernel(&self.xi, t0, t)
    }

    pub fn eval(&self, target: SpaceTimePoint, source: SpaceTimePoint) -> Result<Complex64> {
        k0(&self.xi, target, source)
    }
}

/// Coefficients of `K₀(·,t|·,t₀)`. For `t ≤ t₀` the gate is closed.
pub fn kernel(xi: &TestFunction, t0: f64, t: f64) -> GaussianKernel {
    let span = t - t0;
    if span <= 0.0 {
        return GaussianKernel {
            prefactor: ZERO,
            alpha: ZERO,
            beta: ZERO,
            gamma: ZERO,
            delta: ZERO,
            epsilon: ZERO,
            phi: ZERO,
            window: Some((t0, t)),
        };
    }
    let drift = xi.integral(t0, t);
    let energy = xi.l2_norm_sq(t0, t);
    let half_inv = Complex64::new(0.5 / span, 0.0);
    GaussianKernel {
        prefactor: inv_sqrt_2pi_i(span),
        alpha: half_inv,
        beta: Complex64::new(-1.0 / span, 0.0),
        gamma: half_inv,
        delta: Complex64::new(drift / span - xi.value(t), 0.0),
        epsilon: Complex64::new(-drift / span + xi.value(t0), 0.0),
        phi: Complex64::new(-0.5 * energy + drift * drift / (2.0 * span), 0.0),
        window: Some((t0, t)),
    }
}

/// `T I₀δ(ξ) = K₀ · e^{ixξ(t) − ix₀ξ(t₀)} · e^{−(i/2)|ξ_{[t₀,t]ᶜ}|²}`.
pub fn t_transform_i0_delta(xi: &TestFunction, target: SpaceTimePoint, source: SpaceTimePoint) -> Result<Complex64> {
    let base = k0(xi, target, source)?;
    Ok(base * dressing(xi, target, source))
}

/// The unimodular factor relating `K₀` to `T I₀δ`.
pub fn dressing(xi: &TestFunction, target: SpaceTimePoint, source: SpaceTimePoint) -> Complex64 {
    let outside = xi.l2_norm_sq_complement(source.t, target.t);
    (I * (target.x * xi.value(target.t) - source.x * xi.value(source.t) - 0.5 * outside)).exp()
}

/// Product of `K₀` along a chain of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainValue {
    pub value: Complex64,
    /// False when the times were not strictly increasing (value is then 0).
    pub causal: bool,
}

/// `Π_i K₀(x_i,t_i|x_{i−1},t_{i−1})` over `points[0] → … → points[n+1]`.
pub fn product_kernel(xi: &TestFunction, points: &[SpaceTimePoint]) -> Result<ChainValue> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("a chain needs at least two points".into()));
    }
    if points.windows(2).any(|w| w[1].t <= w[0].t) {
        return Ok(ChainValue { value: ZERO, causal: false });
    }
    let mut value = Complex64::new(1.0, 0.0);
    for w in points.windows(2) {
        value *= k0(xi, w[1], w[0])?;
    }
    Ok(ChainValue { value, causal: true })
}

/// Compose `K₀` over consecutive times, integrating out every interior
/// position. The result is the kernel from `times[0]` to `times[last]`.
pub fn compose_chain(xi: &TestFunction, times: &[f64]) -> Result<GaussianKernel> {
    if times.len() < 2 {
        return Err(Error::InvalidParameter("a chain needs at least two times".into()));
    }
    let mut acc = kernel(xi, times[0], times[1]);
    for w in times.windows(2).skip(1) {
        acc = kernel(xi, w[0], w[1]).compose(&acc)?;
    }
    Ok(acc)
}

/// `∫ K₀(x,t|x₀,t₀) dx` by Gaussian composition. It is unimodular and tends
/// to 1 as `t ↓ t₀`.
pub fn mass(xi: &TestFunction, x0: f64, t0: f64, t: f64) -> Result<Complex64> {
    if t <= t0 {
        return Err(Error::InvalidParameter("mass needs t > t0".into()));
    }
    Ok(kernel(xi, t0, t).integrate_target()?.eval(0.0, x0))
}

/// Residual of `(i∂_t + ½∂_x² − ξ̇(t)x) K` at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSample {
    pub x: f64,
    pub t: f64,
    pub residual: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub h: f64,
    pub samples: Vec<ResidualSample>,
    pub max_abs: f64,
}

/// Second-order central-difference residual of the driven Schrödinger
/// operator applied to an arbitrary kernel `f(x, t)`.
pub fn green_residual(
    f: impl Fn(f64, f64) -> Complex64,
    field_rate: impl Fn(f64) -> f64,
    points: &[(f64, f64)],
    h: f64,
) -> ResidualField {
    let samples: Vec<ResidualSample> = points
        .iter()
        .map(|&(x, t)| {
            let c = f(x, t);
            let dt = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
            let dxx = (f(x + h, t) - 2.0 * c + f(x - h, t)) / (h * h);
            let r = I * dt + 0.5 * dxx - field_rate(t) * x * c;
            ResidualSample { x, t, residual: r.norm(), magnitude: c.norm() }
        })
        .collect();
    let max_abs = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    ResidualField { h, samples, max_abs }
}

/// [`green_residual`] for `K₀` with source `source` on the mesh `xs × ts`.
pub fn schrodinger_residual_k0(
    xi: &TestFunction,
    source: SpaceTimePoint,
    xs: &[f64],
    ts: &[f64],
    h: f64,
) -> Result<ResidualField> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("stencil spacing must be positive".into()));
    }
    if ts.iter().any(|&t| t - h <= source.t) {
        return Err(Error::InvalidParameter(format!(
            "mesh touches the source time line t = {}",
            source.t
        )));
    }
    let points: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    let f = |x: f64, t: f64| {
        k0(xi, SpaceTimePoint { x, t }, source).expect("mesh is strictly after the source")
    };
    Ok(green_residual(f, |t| xi.derivative(t), &points, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn p(x: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint { x, t }
    }

    fn wiggle() -> TestFunction {
        TestFunction::from_hermite(&[-0.2, 0.3, 0.9, 1.6], &[0.0, 0.8, -0.5, 0.0], &[0.0, 1.0, 0.3, 0.0]).unwrap()
    }

    #[test]
    fn free_value_at_coincident_points() {
        let v = k0(&TestFunction::zero(), p(0.0, 1.0 / (2.0 * PI)), p(0.0, 0.0)).unwrap();
        assert!((v - Complex64::new(FRAC_PI_4.cos(), -FRAC_PI_4.sin())).norm() < 1e-15);
    }

    #[test]
    fn free_value_unit_separation() {
        let v = k0(&TestFunction::zero(), p(1.0, 1.0), p(0.0, 0.0)).unwrap();
        assert!((v.norm() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((v.arg() - (0.5 - FRAC_PI_4)).abs() < 1e-15);
    }

    #[test]
    fn causality_and_singularity() {
        let xi = wiggle();
        assert_eq!(k0(&xi, p(0.3, 0.1), p(0.0, 0.5)).unwrap(), ZERO);
        assert_eq!(k0(&xi, p(0.3, 0.5), p(0.0, 0.5)).unwrap(), ZERO);
        assert!(matches!(k0(&xi, p(0.3, 0.5), p(0.3, 0.5)), Err(Error::Singular { .. })));
    }

    #[test]
    fn kernel_matches_direct_formula() {
        let xi = wiggle();
        let g = kernel(&xi, 0.1, 1.2);
        for &(x, x0) in &[(0.0, 0.0), (1.3, -0.4), (-2.0, 0.7)] {
            let direct = k0(&xi, p(x, 1.2), p(x0, 0.1)).unwrap();
            assert!((g.eval(x, x0) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn dressing_is_inverse_of_itself_removed() {
        let xi = wiggle();
        let (a, b) = (p(0.4, 1.1), p(-0.3, 0.2));
        let t = t_transform_i0_delta(&xi, a, b).unwrap();
        let back = t / dressing(&xi, a, b);
        assert!((back - k0(&xi, a, b).unwrap()).norm() < 1e-15);
        assert!((t.norm() - k0(&xi, a, b).unwrap().norm()).abs() < 1e-15);
    }

    #[test]
    fn disjoint_support_only_shifts_phase() {
        let xi = TestFunction::bump(3.0, 0.5, 1.2).unwrap();
        let (a, b) = (p(0.4, 1.0), p(0.0, 0.0));
        let t = t_transform_i0_delta(&xi, a, b).unwrap();
        let want = k0(&xi, a, b).unwrap() * (-0.5 * I * xi.l2_norm_sq_total()).exp();
        assert!((t - want).norm() < 1e-15);
    }

    #[test]
    fn equally_spaced_chain() {
        let xi = TestFunction::zero();
        let c = product_kernel(&xi, &[p(0.2, 0.0), p(0.2, 0.5), p(0.2, 1.0)]).unwrap();
        let want = 1.0 / (2.0 * PI * I * 0.5);
        assert!((c.value - want).norm() < 1e-15);
        let bad = product_kernel(&xi, &[p(0.0, 0.0), p(0.0, 1.0), p(0.0, 0.5)]).unwrap();
        assert!(!bad.causal);
        assert_eq!(bad.value, ZERO);
    }

    #[test]
    fn chapman_kolmogorov_with_driving() {
        let xi = wiggle();
        let composed = compose_chain(&xi, &[0.0, 0.35, 0.8, 1.4]).unwrap();
        let direct = kernel(&xi, 0.0, 1.4);
        assert!(composed.max_rel_diff(&direct) < 1e-12, "{composed:?} vs {direct:?}");
    }

    #[test]
    fn unit_mass() {
        let xi = wiggle();
        let m = mass(&xi, 0.3, 0.2, 1.0).unwrap();
        assert!((m.norm() - 1.0).abs() < 1e-13);
        let short = mass(&xi, 0.3, 0.5, 0.5 + 1e-9).unwrap();
        assert!((short - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn residual_rejects_mesh_on_source_line() {
        let xi = TestFunction::zero();
        assert!(schrodinger_residual_k0(&xi, p(0.0, 0.0), &[1.0], &[0.005], 0.01).is_err());
    }

    fn observed_order(xi: &TestFunction, f: impl Fn(f64, f64) -> Complex64 + Copy) -> (f64, f64) {
        let pts = [(0.7, 0.55), (-0.4, 0.62), (1.1, 1.2), (0.2, 1.35)];
        let r: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| green_residual(f, |t| xi.derivative(t), &pts, h).max_abs)
            .collect();
        ((r[0] / r[1]).log2().min((r[1] / r[2]).log2()), r[2])
    }

    #[test]
    fn residual_is_second_order() {
        for xi in [TestFunction::zero(), wiggle(), TestFunction::linear_window(0.3, -1.5, (0.4, 1.4), 0.2).unwrap()] {
            let src = p(0.1, 0.0);
            let (order, _) = observed_order(&xi, |x, t| k0(&xi, p(x, t), src).unwrap());
            assert!(order > 1.9, "order {order}");
        }
    }

    #[test]
    fn residual_detects_missing_energy_term() {
        let xi = wiggle();
        let src = p(0.1, 0.0);
        let wrong = |x: f64, t: f64| {
            k0(&xi, p(x, t), src).unwrap() * (0.5 * I * xi.l2_norm_sq(0.0, t)).exp()
        };
        let (order, last) = observed_order(&xi, wrong);
        assert!(order < 0.5 && last > 1e-2, "order {order}, residual {last}");
    }
}
