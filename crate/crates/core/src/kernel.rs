//! Complex Gaussian kernels `p · exp(i(αx² + βx x₀ + γx₀² + δx + εx₀ + φ))`
//! and their exact composition.

use crate::error::{Error, Result};
use crate::numeric::I;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite(format!("space-time point ({x}, {t})")));
        }
        Ok(Self { x, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub prefactor: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub epsilon: Complex64,
    pub phi: Complex64,
    /// `(t₀, t)`: the kernel vanishes unless `t > t₀`. `None` is ungated.
    pub window: Option<(f64, f64)>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl GaussianKernel {
    /// A kernel with no `x₀` dependence, i.e. a function of `x` alone.
    pub fn profile(prefactor: Complex64, alpha: Complex64, delta: Complex64, phi: Complex64) -> Self {
        Self { prefactor, alpha, beta: ZERO, gamma: ZERO, delta, epsilon: ZERO, phi, window: None }
    }

    pub fn is_open(&self) -> bool {
        self.window.is_none_or(|(t0, t)| t > t0)
    }

    /// The exponent `i(…)` without the prefactor.
    pub fn exponent(&self, x: f64, x0: f64) -> Complex64 {
        I * (self.alpha * x * x
            + self.beta * x * x0
            + self.gamma * x0 * x0
            + self.delta * x
            + self.epsilon * x0
            + self.phi)
    }

    pub fn eval(&self, x: f64, x0: f64) -> Complex64 {
        if !self.is_open() {
            return ZERO;
        }
        self.prefactor * self.exponent(x, x0).exp()
    }

    /// `∫ self(x, y) · first(y, x₀) dy`.
    ///
    /// Needs `A = γ_self + α_first` with `Im A ≥ 0` and `A ≠ 0`; the integral
    /// is then an (at worst Fresnel-regularised) Gaussian.
    pub fn compose(&self, first: &GaussianKernel) -> Result<GaussianKernel> {
        let window = match (first.window, self.window) {
            (Some((t0, _)), Some((_, t))) => Some((t0, t)),
            (w, None) | (None, w) => w,
        };
        if !self.is_open() || !first.is_open() {
            return Ok(GaussianKernel {
                prefactor: ZERO,
                alpha: ZERO,
                beta: ZERO,
                gamma: ZERO,
                delta: ZERO,
                epsilon: ZERO,
                phi: ZERO,
                window,
            });
        }
        let a = self.gamma + first.alpha;
        if a.im < 0.0 {
            return Err(Error::DivergentGaussian(format!("Im A = {} < 0", a.im)));
        }
        if a.norm() == 0.0 || !a.is_finite() {
            return Err(Error::DivergentGaussian(format!("degenerate quadratic coefficient {a}")));
        }
        let b2 = self.beta;
        let b1 = first.beta;
        let c = self.epsilon + first.delta;
        let four_a = 4.0 * a;
        let two_a = 2.0 * a;
        // ∫ exp(i(Ay² + By)) dy = √(π/(−iA)) · exp(−iB²/(4A))
        let gauss = (PI / (-I * a)).sqrt();
        Ok(GaussianKernel {
            prefactor: self.prefactor * first.prefactor * gauss,
            alpha: self.alpha - b2 * b2 / four_a,
            beta: -b1 * b2 / two_a,
            gamma: first.gamma - b1 * b1 / four_a,
            delta: self.delta - c * b2 / two_a,
            epsilon: first.epsilon - c * b1 / two_a,
            phi: first.phi + self.phi - c * c / four_a,
            window,
        })
    }

    /// `∫ self(x, x₀) dx`, returned as a kernel that depends on `x₀` only.
    pub fn integrate_target(&self) -> Result<GaussianKernel> {
        GaussianKernel::profile(Complex64::new(1.0, 0.0), ZERO, ZERO, ZERO).compose(self)
    }

    /// Exchange the roles of `x` and `x₀`.
    pub fn transpose(&self) -> GaussianKernel {
        GaussianKernel {
            alpha: self.gamma,
            gamma: self.alpha,
            delta: self.epsilon,
            epsilon: self.delta,
            ..*self
        }
    }

    /// Multiply by `e^{i(dδ·x + dε·x₀ + dφ)}`.
    pub fn dressed(&self, d_delta: f64, d_epsilon: f64, d_phi: f64) -> GaussianKernel {
        GaussianKernel {
            delta: self.delta + d_delta,
            epsilon: self.epsilon + d_epsilon,
            phi: self.phi + d_phi,
            ..*self
        }
    }

    /// Largest relative difference across prefactor-weighted coefficients.
    ///
    /// Phases are compared modulo nothing, so callers should normalise
    /// prefactors first if `φ` may differ by `2π`.
    pub fn max_rel_diff(&self, other: &GaussianKernel) -> f64 {
        let pairs = [
            (self.prefactor, other.prefactor),
            (self.alpha, other.alpha),
            (self.beta, other.beta),
            (self.gamma, other.gamma),
            (self.delta, other.delta),
            (self.epsilon, other.epsilon),
            (self.phi, other.phi),
        ];
        pairs
            .iter()
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(1.0))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free(t: f64) -> GaussianKernel {
        let a = c(1.0 / (2.0 * t), 0.0);
        GaussianKernel {
            prefactor: crate::numeric::inv_sqrt_2pi_i(t),
            alpha: a,
            beta: c(-1.0 / t, 0.0),
            gamma: a,
            delta: ZERO,
            epsilon: ZERO,
            phi: ZERO,
            window: Some((0.0, t)),
        }
    }

    #[test]
    fn free_kernels_compose_to_free_kernel() {
        let k = free(0.7).compose(&free(0.4)).unwrap();
        let want = free(1.1);
        assert!(k.max_rel_diff(&GaussianKernel { window: k.window, ..want }) < 1e-14);
    }

    #[test]
    fn closed_gate_is_zero() {
        let mut k = free(1.0);
        k.window = Some((1.0, 1.0));
        assert_eq!(k.eval(0.0, 0.0), ZERO);
    }

    #[test]
    fn compose_matches_quadrature() {
        // damped kernels so a plain trapezoid sum converges
        let g1 = GaussianKernel {
            prefactor: c(0.3, -0.2),
            alpha: c(0.4, 0.6),
            beta: c(-0.5, 0.1),
            gamma: c(0.2, 0.3),
            delta: c(0.1, 0.0),
            epsilon: c(-0.2, 0.05),
            phi: c(0.3, 0.0),
            window: None,
        };
        let g2 = GaussianKernel { alpha: c(-0.3, 0.5), gamma: c(0.7, 0.4), ..g1 };
        let k = g2.compose(&g1).unwrap();
        let (x, x0) = (0.3, -0.8);
        let h = 1e-3;
        let sum: Complex64 = (-30_000..=30_000)
            .map(|j| {
                let y = j as f64 * h;
                g2.eval(x, y) * g1.eval(y, x0)
            })
            .sum::<Complex64>()
            * h;
        assert!((k.eval(x, x0) - sum).norm() < 1e-12 * sum.norm());
    }

    #[test]
    fn divergent_composition_rejected() {
        let g = GaussianKernel::profile(c(1.0, 0.0), c(0.0, -1.0), ZERO, ZERO);
        let h = GaussianKernel { gamma: c(0.0, -0.5), ..g };
        assert!(matches!(h.compose(&g), Err(Error::DivergentGaussian(_))));
    }

    #[test]
    fn free_kernel_has_unit_mass() {
        let m = free(0.3).integrate_target().unwrap();
        assert!((m.eval(5.0, 1.7) - c(1.0, 0.0)).norm() < 1e-14);
    }

    fn arb_kernel() -> impl Strategy<Value = GaussianKernel> {
        let coef = || (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b));
        let coupling = || (-0.5f64..0.5, -0.5f64..0.5).prop_map(|(a, b)| c(a, b));
        let damped = || (-1.0f64..1.0, 0.5f64..1.5).prop_map(|(a, b)| c(a, b));
        (coef(), damped(), coupling(), damped(), coef(), coef(), coef()).prop_map(|(p, al, be, ga, de, ep, ph)| {
            GaussianKernel {
                prefactor: p + c(1.5, 0.0),
                alpha: al,
                beta: be,
                gamma: ga,
                delta: de,
                epsilon: ep,
                phi: ph,
                window: None,
            }
        })
    }

    proptest! {
        #[test]
        fn composition_is_associative(g1 in arb_kernel(), g2 in arb_kernel(), g3 in arb_kernel()) {
            let left = g3.compose(&g2).and_then(|g| g.compose(&g1));
            let right = g2.compose(&g1).and_then(|g| g3.compose(&g));
            prop_assume!(left.is_ok() && right.is_ok());
            let (left, right) = (left.unwrap(), right.unwrap());
            prop_assert!(left.max_rel_diff(&right) < 1e-10, "{left:?} vs {right:?}");
        }
    }
}
