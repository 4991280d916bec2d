//! S- and T-transforms of a small catalog of white-noise functionals, and
//! numerical checks of the U-functional properties: ray analyticity and the
//! uniform order-two growth bound `|F(zξ)| ≤ P exp(Q|z|²|ξ|²)`.
//!
//! Every catalog functional depends on `ξ` only through a few real moments
//! (`∫ξ` over a window, `∫ξ²`), so `F(zξ)` is evaluated for complex `z` by
//! scaling those moments.
//!
//! The norm in the growth bound is the surrogate `sup_t |ξ(t)|` over the
//! whole line.

use crate::error::{Error, Result};
use crate::kernel::SpaceTimePoint;
use crate::numeric::{inv_sqrt_2pi_i, I};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    S,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UFunctional {
    /// The free Feynman integrand `I₀δ(x(t) − x)` started at `source`.
    I0Delta { target: SpaceTimePoint, source: SpaceTimePoint },
    /// Donsker's delta `δ(B(t) − a)`.
    Donsker { a: f64, t: f64 },
    /// `N exp(c ∫ₐᵇ ω²)`.
    NormExp { c: Complex64, interval: (f64, f64) },
    /// `S F(ξ) = exp((∫ₐᵇ ξ)³)`: entire along rays but of order three.
    CubicExp { interval: (f64, f64) },
}

impl UFunctional {
    pub fn i0delta(target: SpaceTimePoint, source: SpaceTimePoint) -> Result<Self> {
        if !(target.t > source.t) {
            return Err(Error::InvalidParameter(format!("need t > t0, got t = {}, t0 = {}", target.t, source.t)));
        }
        Ok(Self::I0Delta { target, source })
    }

    pub fn donsker(a: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("Donsker delta needs t > 0, got t = {t}")));
        }
        Ok(Self::Donsker { a, t })
    }

    pub fn normexp(c: Complex64, interval: (f64, f64)) -> Result<Self> {
        if c == Complex64::new(0.5, 0.0) {
            return Err(Error::Pole);
        }
        if !(interval.1 > interval.0) {
            return Err(Error::DegenerateInterval { a: interval.0, b: interval.1 });
        }
        Ok(Self::NormExp { c, interval })
    }

    pub fn cubic_exp(interval: (f64, f64)) -> Result<Self> {
        if !(interval.1 > interval.0) {
            return Err(Error::DegenerateInterval { a: interval.0, b: interval.1 });
        }
        Ok(Self::CubicExp { interval })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::I0Delta { .. } => "i0delta",
            Self::Donsker { .. } => "donsker",
            Self::NormExp { .. } => "normexp",
            Self::CubicExp { .. } => "cubicexp",
        }
    }

    /// The transform in which the functional is usually written down.
    pub fn native(&self) -> TransformKind {
        match self {
            Self::I0Delta { .. } => TransformKind::T,
            _ => TransformKind::S,
        }
    }

    pub fn eval(&self, kind: TransformKind, xi: &TestFunction, z: Complex64) -> Complex64 {
        match kind {
            TransformKind::S => self.s_at(xi, z),
            TransformKind::T => self.t_at(xi, z),
        }
    }

    /// `S F(zξ)`.
    pub fn s_at(&self, xi: &TestFunction, z: Complex64) -> Complex64 {
        match *self {
            Self::I0Delta { target, source } => {
                let span = target.t - source.t;
                let drift = z * xi.integral(source.t, target.t);
                let energy = z * z * xi.l2_norm_sq_total();
                let d = target.x - source.x - I * drift;
                inv_sqrt_2pi_i(span) * (0.5 * (I - 1.0) * energy + I * d * d / (2.0 * span)).exp()
            }
            Self::Donsker { a, t } => {
                let d = z * xi.integral(0.0, t) - a;
                (-d * d / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
            }
            Self::NormExp { c, interval } => {
                (c / (1.0 - 2.0 * c) * z * z * xi.l2_norm_sq(interval.0, interval.1)).exp()
            }
            Self::CubicExp { interval } => (z * xi.integral(interval.0, interval.1)).powi(3).exp(),
        }
    }

    /// `T F(zξ)` from its own closed form, not through the S-transform.
    pub fn t_at(&self, xi: &TestFunction, z: Complex64) -> Complex64 {
        match *self {
            Self::I0Delta { target, source } => {
                let span = target.t - source.t;
                let d = z * xi.integral(source.t, target.t) + target.x - source.x;
                let energy = z * z * xi.l2_norm_sq_total();
                inv_sqrt_2pi_i(span) * (-0.5 * I * energy + I * d * d / (2.0 * span)).exp()
            }
            Self::Donsker { a, t } => {
                // E[e^{i⟨ω,ξ⟩} | B(t) = a] times the density of B(t) at a
                let j = z * xi.integral(0.0, t);
                let energy = z * z * xi.l2_norm_sq_total();
                let density = (-a * a / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
                density * (I * j * a / t - 0.5 * (energy - j * j / t)).exp()
            }
            Self::NormExp { c, interval } => {
                let inside = z * z * xi.l2_norm_sq(interval.0, interval.1);
                let outside = z * z * xi.l2_norm_sq_complement(interval.0, interval.1);
                (-0.5 * outside - 0.5 * inside / (1.0 - 2.0 * c)).exp()
            }
            Self::CubicExp { .. } => c_factor(xi, z) * self.s_at(xi, I * z),
        }
    }
}

/// `C(zξ) = exp(−½ z²|ξ|₀²)`.
pub fn c_factor(xi: &TestFunction, z: Complex64) -> Complex64 {
    (-0.5 * z * z * xi.l2_norm_sq_total()).exp()
}

/// `S Φ(ξ) = (2πt)^{−1/2} exp(−(∫₀ᵗ ξ − a)²/(2t))` for Donsker's delta.
pub fn donsker_s_transform(a: f64, t: f64, xi: &TestFunction) -> Result<Complex64> {
    Ok(UFunctional::donsker(a, t)?.s_at(xi, ONE))
}

/// `exp(c/(1 − 2c) ∫ₐᵇ ξ²)`.
pub fn normexp_s_transform(c: Complex64, xi: &TestFunction, interval: (f64, f64)) -> Result<Complex64> {
    Ok(UFunctional::normexp(c, interval)?.s_at(xi, ONE))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StReport {
    pub t_value: Complex64,
    pub s_continued: Complex64,
    pub c_factor: Complex64,
    /// `|T(ξ) − C(ξ)·S(iξ)|`.
    pub difference: f64,
}

/// Compare `T F(ξ)` with `C(ξ)·S F(iξ)`.
pub fn st_relation_check(f: &UFunctional, xi: &TestFunction) -> StReport {
    let t_value = f.t_at(xi, ONE);
    let s_continued = f.s_at(xi, I);
    let c = c_factor(xi, ONE);
    StReport { t_value, s_continued, c_factor: c, difference: (t_value - c * s_continued).norm() }
}

/// Exponent `½(1 + 2/γ + |Δ|)` of the order-two bound on the perturbative terms.
pub fn term_growth_exponent(gamma: f64, window_len: f64) -> f64 {
    0.5 * (1.0 + 2.0 / gamma + window_len)
}

const RADII: usize = 16;
const ANGLES: usize = 32;
/// Allowed excess of `log|F|` over the fitted envelope.
pub const GROWTH_SLACK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub functional: String,
    pub transform: TransformKind,
    #[serde(rename = "P")]
    pub p_const: f64,
    #[serde(rename = "Q")]
    pub q_const: f64,
    /// Norm index the sup-norm surrogate stands in for.
    pub p_surrogate: u32,
    /// Largest `log|F| − log P − Q|z|²|ξ|²` over all samples, or `∞` on overflow.
    pub max_violation: f64,
    pub passed: bool,
}

/// Fit `log|F(zξ)| ≤ log P + Q|z|²|ξ|²` over the disk `|z| ≤ zmax`.
///
/// `Q` is the steepest least-squares slope, over rays, of the per-radius
/// maxima on the inner half of the disk, and `P` the smallest constant that
/// then dominates those maxima. The verdict asks that the same pair dominate
/// every sample on the full disk, up to [`GROWTH_SLACK`].
pub fn check_order_two_bound(f: &UFunctional, rays: &[TestFunction], zmax: f64, p: u32) -> Result<GrowthReport> {
    if !(zmax > 0.0) || rays.is_empty() {
        return Err(Error::InvalidParameter("need zmax > 0 and at least one ray".into()));
    }
    let kind = f.native();
    // (x = |z|²|ξ|², max over angles of log|F|) per ray and radius
    let samples: Vec<Vec<(f64, f64)>> = rays
        .par_iter()
        .map(|xi| {
            let s2 = xi.sup_norm_total().powi(2);
            (1..=RADII)
                .map(|j| {
                    let r = zmax * j as f64 / RADII as f64;
                    let top = (0..ANGLES)
                        .map(|k| {
                            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / ANGLES as f64);
                            let v = f.eval(kind, xi, z).norm();
                            if v.is_finite() { v.ln() } else { f64::INFINITY }
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    (r * r * s2, top)
                })
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = samples.iter().flatten().copied().collect();
    let inner: Vec<Vec<(f64, f64)>> =
        samples.iter().map(|ray| ray[..RADII / 2].iter().copied().filter(|s| s.1.is_finite()).collect()).collect();
    let q = inner.iter().map(|ray| least_squares(ray).1).fold(0.0, f64::max);
    let log_p = inner.iter().flatten().map(|&(x, y)| y - q * x).fold(f64::NEG_INFINITY, f64::max);
    let max_violation = all.iter().map(|&(x, y)| y - log_p - q * x).fold(0.0, f64::max);
    Ok(GrowthReport {
        functional: f.name().to_string(),
        transform: kind,
        p_const: log_p.exp(),
        q_const: q,
        p_surrogate: p,
        max_violation,
        passed: max_violation <= GROWTH_SLACK,
    })
}

/// Intercept and slope of the least-squares line through `pts`.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorReport {
    pub radius: f64,
    /// Scaled coefficients `a_k r^k`, `k < samples`.
    pub scaled_coefficients: Vec<Complex64>,
    /// `Σ_{k>K} |a_k| r^k` for each truncation order `K`.
    pub remainders: Vec<f64>,
    /// Largest gap, relative to `max |F|` on the circle, between the
    /// coefficients of `F²` from squared samples and the Cauchy product of
    /// those of `F`, over the lower half of the orders.
    pub cauchy_defect: f64,
    pub scale: f64,
}

impl TaylorReport {
    /// Remainder past half the sample count is at roundoff relative to the
    /// function's size on the circle.
    pub fn decays_factorially(&self) -> bool {
        let half = self.remainders.len() / 2;
        self.remainders[half] <= 1e-10 * self.scale && self.cauchy_defect <= 1e-10
    }
}

/// Taylor data of `z ↦ F(zξ)` from `samples` equispaced values on `|z| = r`.
pub fn ray_taylor(f: &UFunctional, kind: TransformKind, xi: &TestFunction, radius: f64, samples: usize) -> Result<TaylorReport> {
    if !(radius > 0.0) || samples < 4 {
        return Err(Error::InvalidParameter("need radius > 0 and at least 4 samples".into()));
    }
    let n = samples;
    let values: Vec<Complex64> =
        (0..n).map(|j| f.eval(kind, xi, Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{} on |z| = {radius}", f.name())));
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let coeffs = dft(&values);
    let squared = dft(&values.iter().map(|v| v * v).collect::<Vec<_>>());
    let mut remainders = vec![0.0; n];
    let mut tail = 0.0;
    for k in (0..n).rev() {
        remainders[k] = tail;
        tail += coeffs[k].norm();
    }
    let cauchy_defect = (0..n / 2)
        .map(|k| {
            let conv: Complex64 = (0..=k).map(|m| coeffs[m] * coeffs[k - m]).sum();
            (conv - squared[k]).norm()
        })
        .fold(0.0, f64::max)
        / (scale * scale).max(f64::MIN_POSITIVE);
    Ok(TaylorReport { radius, scaled_coefficients: coeffs, remainders, cauchy_defect, scale })
}

/// `(1/n) Σ_j v_j e^{−2πijk/n}`.
fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}
