//! Nested quadrature for the simplex integral, independent of its closed form.

use std::f64::consts::{FRAC_PI_2, PI};

/// Half range of the tanh–sinh parameter; nodes reach within `e^{−85}` of 0.
const T_MAX: f64 = 4.0;
const MAX_LEVEL: u32 = 8;

/// `∫_0^len g(u) du` for `g` with an integrable power singularity at 0.
///
/// Nodes are generated as distances from 0, so `g` is never evaluated at a
/// point rounded into the singularity.
pub fn tanh_sinh(g: &dyn Fn(f64) -> f64, len: f64, tol: f64) -> f64 {
    let node = |t: f64| -> (f64, f64) {
        let v = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * v.abs()).exp();
        // 1 + tanh v, and the weight dτ/dt · 2/(1 + tanh) factors, without cancellation
        let one_plus = if v < 0.0 { 2.0 * e / (1.0 + e) } else { 2.0 / (1.0 + e) };
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        (0.5 * len * one_plus, 0.5 * len * FRAC_PI_2 * t.cosh() * sech2)
    };
    let eval = |t: f64| {
        let (u, w) = node(t);
        if w == 0.0 || u <= 0.0 || u >= len {
            0.0
        } else {
            w * g(u)
        }
    };
    let mut h = 1.0;
    let mut sum: f64 = (0..=(2.0 * T_MAX) as i32).map(|k| eval(k as f64 - T_MAX)).sum();
    let mut estimate = h * sum;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let n = (T_MAX / h) as i32;
        sum += (-n + 1..n).step_by(2).map(|k| eval(k as f64 * h)).sum::<f64>();
        let next = h * sum;
        let done = (next - estimate).abs() <= tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// `∫_{t₀<t₁<…<tₙ<t} Π_{j=1}^{n+1} (2π(t_j − t_{j−1}))^{−α}` by nesting the
/// one-gap convolution `F_k(s) = ∫_0^s (2π(s−u))^{−α} F_{k−1}(u) du`.
pub fn simplex_quadrature(n: usize, alpha: f64, span: f64, tol: f64) -> f64 {
    fn level(k: usize, alpha: f64, s: f64, tol: f64) -> f64 {
        let kern = |gap: f64| (2.0 * PI * gap).powf(-alpha);
        if k == 0 {
            return kern(s);
        }
        // split at s/2 so each piece is singular only at its own origin
        let h = 0.5 * s;
        let near_end = tanh_sinh(&|w| kern(w) * level(k - 1, alpha, s - w, tol), h, tol);
        let near_start = tanh_sinh(&|u| kern(s - u) * level(k - 1, alpha, u, tol), h, tol);
        near_end + near_start
    }
    level(n, alpha, span, tol)
}
