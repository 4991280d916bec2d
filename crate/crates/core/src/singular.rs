//! Product-integration rules for the endpoint factor `e^{ic/z²}`.
//!
//! Near either end of a time integral the free propagator behaves like
//! `(2πi r)^{-1/2} exp(i c / r)`, with `r` the distance to the endpoint and
//! `c = D²/2 ≥ 0` set by the spatial separation. Substituting `r = z²` turns
//! `r^{-1/2} dr` into `2 dz` and leaves the bounded but infinitely
//! oscillating weight `e^{ic/z²}`. Against it we need the moments
//!
//! ```text
//! M_k(z_a, z_b; c) = ∫_{z_a}^{z_b} z^k e^{ic/z²} dz = c^{(k+1)/2} [H_{k+2}(√c/z_b) − H_{k+2}(√c/z_a)],
//! ```
//!
//! where `H_m(s) = ∫_s^∞ σ^{-m} e^{iσ²} dσ`. A panel rule then integrates the
//! degree-[`DEGREE`] interpolant of the smooth remainder exactly.

use crate::numeric::{cis, I};
use crate::quadrature::legendre20;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

/// Polynomial degree of the panel rule.
pub const DEGREE: usize = 4;
/// Highest tail index needed: `H_{DEGREE + 2}`.
pub const MAX_M: usize = DEGREE + 2;

/// `H_m(s)` stored at index `m` for `m = 1..=MAX_M`; index 0 is unused.
pub type Tails = [Complex64; MAX_M + 1];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 1.5;
const ASYMPTOTIC_LIMIT: f64 = 8.0;

/// Steepest-descent panels in `y` for `∫_0^∞ e^{-y} g(y) dy`.
const DESCENT_PANELS: [(f64, f64); 6] =
    [(0.0, 1.0), (1.0, 3.0), (3.0, 7.0), (7.0, 15.0), (15.0, 28.0), (28.0, 45.0)];

/// `∫_0^s e^{iσ²} dσ` by its power series.
fn fresnel_series(s: f64) -> Complex64 {
    let s2 = s * s;
    let mut term = Complex64::new(s, 0.0); // i^n s^{2n+1} / n!
    let mut sum = term;
    for n in 1..200 {
        term *= I * s2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// `H₁(s) = ½E₁(−is²)` from the exponential-integral series.
fn h1_series(s: f64) -> Complex64 {
    let z = I * s * s;
    let mut power = Complex64::new(1.0, 0.0); // z^k / k!
    let mut sum = ZERO;
    for k in 1..200 {
        power *= z / k as f64;
        let add = power / k as f64;
        sum += add;
        if add.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    0.5 * (Complex64::new(-EULER_GAMMA - 2.0 * s.ln(), FRAC_PI_2) - sum)
}

fn series_tails(s: f64) -> Tails {
    let e = cis(s * s);
    let mut h = [ZERO; MAX_M + 1];
    let h0 = cis(FRAC_PI_4) * (0.5 * PI.sqrt()) - fresnel_series(s);
    h[1] = h1_series(s);
    // H_{m+2} = (s^{-m-1} e^{is²} + 2i H_m) / (m + 1)
    let mut prev_even = h0;
    let mut m = 0;
    while m + 2 <= MAX_M {
        let next = (e * s.powi(-(m as i32) - 1) + 2.0 * I * prev_even) / (m + 1) as f64;
        h[m + 2] = next;
        prev_even = next;
        m += 2;
    }
    let mut m = 1;
    while m + 2 <= MAX_M {
        h[m + 2] = (e * s.powi(-(m as i32) - 1) + 2.0 * I * h[m]) / (m + 1) as f64;
        m += 2;
    }
    h
}

/// Along `σ(y) = √(s² + iy)`:
/// `H_m(s) = (i/2) e^{is²} ∫_0^∞ e^{-y} (s² + iy)^{-(m+1)/2} dy`.
fn descent_tails(s: f64) -> Tails {
    let s2 = s * s;
    let mut acc = [ZERO; MAX_M + 1];
    for &(lo, hi) in DESCENT_PANELS.iter() {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for &(x, w) in legendre20() {
            let y = mid + half * x;
            let inv_sig = 1.0 / Complex64::new(s2, y).sqrt();
            let weight = w * half * (-y).exp();
            let mut p = inv_sig * inv_sig; // σ^{-(m+1)} at m = 1
            for slot in acc.iter_mut().skip(1) {
                *slot += weight * p;
                p *= inv_sig;
            }
        }
    }
    let scale = 0.5 * I * cis(s2);
    let mut h = [ZERO; MAX_M + 1];
    for m in 1..=MAX_M {
        h[m] = scale * acc[m];
    }
    h
}

/// `Σ_k c_k s^{-m-1-2k}` with `c₀ = i/2`, `c_{k+1} = −i c_k (m + 1 + 2k)/2`,
/// summed to its smallest term.
fn asymptotic(s: f64, m: usize) -> Complex64 {
    let inv_s2 = 1.0 / (s * s);
    let mut term = 0.5 * I * s.powi(-(m as i32) - 1);
    let mut sum = term;
    let mut prev = term.norm();
    for k in 0..200usize {
        term *= -I * ((m + 1 + 2 * k) as f64) * 0.5 * inv_s2;
        let mag = term.norm();
        if mag > prev {
            break;
        }
        sum += term;
        if mag < 1e-18 * sum.norm() {
            break;
        }
        prev = mag;
    }
    sum
}

/// `H_m(s)` for `m = 1..=MAX_M`. `s = ∞` gives zeros.
pub fn tails(s: f64) -> Tails {
    if s.is_infinite() {
        return [ZERO; MAX_M + 1];
    }
    debug_assert!(s > 0.0);
    if s < SERIES_LIMIT {
        series_tails(s)
    } else if s < ASYMPTOTIC_LIMIT {
        descent_tails(s)
    } else {
        let e = cis(s * s);
        let mut h = [ZERO; MAX_M + 1];
        for (m, slot) in h.iter_mut().enumerate().skip(1) {
            *slot = e * asymptotic(s, m);
        }
        h
    }
}

/// Tails at distance `z` from the singular end for phase constant `c > 0`.
pub fn tails_at(z: f64, c: f64) -> Tails {
    if z == 0.0 {
        [ZERO; MAX_M + 1]
    } else {
        tails(c.sqrt() / z)
    }
}

/// Raw moments `M_k = ∫_{z_a}^{z_b} z^k e^{ic/z²} dz`, `k = 0..=DEGREE`.
pub fn moments(z_a: f64, z_b: f64, c: f64) -> [Complex64; DEGREE + 1] {
    if c == 0.0 {
        return std::array::from_fn(|k| {
            let p = (k + 1) as i32;
            Complex64::new((z_b.powi(p) - z_a.powi(p)) / p as f64, 0.0)
        });
    }
    moments_from_tails(c, &tails_at(z_a, c), &tails_at(z_b, c))
}

/// [`moments`] from tails already evaluated at both panel ends.
pub fn moments_from_tails(c: f64, near: &Tails, far: &Tails) -> [Complex64; DEGREE + 1] {
    let sc = c.sqrt();
    let mut scale = sc; // c^{(k+1)/2}
    std::array::from_fn(|k| {
        let v = scale * (far[k + 2] - near[k + 2]);
        scale *= sc;
        v
    })
}

/// Interpolation abscissae on `[0, 1]` (Chebyshev–Lobatto).
pub fn rule_nodes() -> &'static [f64; DEGREE + 1] {
    static NODES: OnceLock<[f64; DEGREE + 1]> = OnceLock::new();
    NODES.get_or_init(|| std::array::from_fn(|j| 0.5 * (1.0 - (j as f64 * PI / DEGREE as f64).cos())))
}

/// `coef[k][j]`: coefficient of `η^k` in the Lagrange basis polynomial `ℓ_j`.
fn lagrange_coefficients() -> &'static [[f64; DEGREE + 1]; DEGREE + 1] {
    static COEF: OnceLock<[[f64; DEGREE + 1]; DEGREE + 1]> = OnceLock::new();
    COEF.get_or_init(|| {
        let nodes = rule_nodes();
        let v = DMatrix::from_fn(DEGREE + 1, DEGREE + 1, |j, k| nodes[j].powi(k as i32));
        let inv = v.try_inverse().expect("distinct nodes");
        std::array::from_fn(|k| std::array::from_fn(|j| inv[(k, j)]))
    })
}

/// Weights `W_j` with `∫_{z_a}^{z_b} e^{ic/z²} G(z) dz ≈ Σ_j W_j G(z_a + (z_b − z_a) η_j)`,
/// exact when `G` is a polynomial of degree ≤ [`DEGREE`].
pub fn panel_weights(z_a: f64, z_b: f64, c: f64) -> [Complex64; DEGREE + 1] {
    weights_from_raw(z_a, z_b, c, moments(z_a, z_b, c))
}

/// [`panel_weights`] from precomputed raw moments.
pub fn weights_from_raw(z_a: f64, z_b: f64, c: f64, raw: [Complex64; DEGREE + 1]) -> [Complex64; DEGREE + 1] {
    let w = z_b - z_a;
    let local: [Complex64; DEGREE + 1] = if c == 0.0 {
        std::array::from_fn(|k| Complex64::new(w / (k + 1) as f64, 0.0))
    } else {
        // η^k = w^{-k} Σ_i C(k,i) z^i (−z_a)^{k−i}
        std::array::from_fn(|k| {
            let mut acc = ZERO;
            let mut binom = 1.0;
            for (i, r) in raw.iter().enumerate().take(k + 1) {
                acc += binom * (-z_a).powi((k - i) as i32) * r;
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            acc / w.powi(k as i32)
        })
    };
    let coef = lagrange_coefficients();
    std::array::from_fn(|j| (0..=DEGREE).map(|k| coef[k][j] * local[k]).sum())
}
