//! Gauss rules built with the Golub–Welsch eigenvalue method.

use crate::error::{Error, Result};
use crate::numeric::ln_gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// A node/weight pair.
pub type Node = (f64, f64);

/// Gauss–Jacobi rule on `[a, b]` for the weight `(b − τ)^α (τ − a)^β`.
///
/// `n` nodes integrate `u(τ)·(b − τ)^α (τ − a)^β` exactly for polynomials `u`
/// of degree up to `2n − 1`. Both exponents must exceed −1.
pub fn gauss_jacobi(n: usize, interval: (f64, f64), exponents: (f64, f64)) -> Result<Vec<Node>> {
    let (a, b) = interval;
    let (alpha, beta) = exponents;
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::DegenerateInterval { a, b });
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "jacobi exponents must exceed -1, got ({alpha}, {beta})"
        )));
    }

    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        jac[(k, k)] = if k == 0 {
            // (β² − α²)/((α + β)(α + β + 2)) with the α + β factor cancelled
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let b2 = if k == 1 {
            // (k + α + β) cancels against (2k + α + β − 1) at k = 1
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        let off = b2.sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }

    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0);
    let mu0 = ln_mu0.exp();

    let eig = SymmetricEigen::new(jac);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let scale = half.powf(ab + 1.0);
    let mut nodes: Vec<Node> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            // x is on [-1, 1] with weight (1 − x)^α (1 + x)^β
            (mid + half * x, mu0 * v0 * v0 * scale)
        })
        .collect();
    nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(nodes)
}

/// Gauss–Jacobi nodes for the Chebyshev-type weight `((τ − a)(b − τ))^{-1/2}`.
pub fn gauss_jacobi_nodes(n: usize, interval: (f64, f64)) -> Result<Vec<Node>> {
    gauss_jacobi(n, interval, (-0.5, -0.5))
}

pub fn gauss_legendre(n: usize, interval: (f64, f64)) -> Result<Vec<Node>> {
    gauss_jacobi(n, interval, (0.0, 0.0))
}

/// Rule for `∫₀ᴸ F(u) du` when `F(u) = u^{−1/2} e^{ic/u} g(u)` with `g` smooth
/// in `√u`: the free kernel near a coincidence in time.
///
/// Where the phase `c/u` stays below π the rule is Gauss–Legendre in `√u` on
/// panels doubling away from the origin. Beyond that the panels are π wide
/// in the phase `φ = c/u`, up to `φ = 16·nodes`; the rest is the two-term
/// integration-by-parts tail, carried by a complex weight on the last point.
/// `cuts` (points of `(0, L)` where `g` jumps) become panel ends.
pub fn fresnel_end_rule(c: f64, len: f64, nodes: usize, cuts: &[f64]) -> Result<Vec<(f64, Complex64)>> {
    if !(len > 0.0) || !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("need L > 0 and finite c >= 0, got L = {len}, c = {c}")));
    }
    let unit = gauss_legendre(nodes, (-1.0, 1.0))?;
    let inner: Vec<f64> = cuts.iter().copied().filter(|&u| u > 0.0 && u < len).collect();
    let mut rule = Vec::new();
    let mut panels = |mut ends: Vec<f64>, map: &dyn Fn(f64) -> (f64, f64)| {
        ends.sort_by(f64::total_cmp);
        ends.dedup();
        for w in ends.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for &(x, wt) in &unit {
                let (u, jac) = map(mid + half * x);
                rule.push((u, Complex64::new(wt * half * jac, 0.0)));
            }
        }
    };

    let u_phase = (c / PI).min(len);
    let (v_lo, v_hi) = (u_phase.sqrt(), len.sqrt());
    let mut ends: Vec<f64> = std::iter::successors(Some(v_lo), |&v| (v > 0.0).then_some(2.0 * v)).take_while(|&v| v < v_hi).collect();
    ends.extend(inner.iter().map(|u| u.sqrt()).filter(|&v| v > v_lo));
    ends.push(v_hi);
    panels(ends, &|v| (v * v, 2.0 * v));

    let phase_max = 16.0 * nodes as f64;
    if c > 0.0 && c / u_phase < phase_max {
        let phi_lo = c / u_phase;
        let mut ends: Vec<f64> = std::iter::successors(Some(phi_lo), |&p| Some(p + PI)).take_while(|&p| p < phase_max).collect();
        ends.extend(inner.iter().filter(|&&u| u < u_phase).map(|&u| c / u).filter(|&p| p < phase_max));
        ends.push(phase_max);
        panels(ends, &|p| (c / p, c / (p * p)));
        // ∫₀^{c/Φ} F du ≈ c (iΦ⁻² + 3/2 Φ⁻³) F(c/Φ)
        rule.push((c / phase_max, c * Complex64::new(1.5 / phase_max.powi(3), phase_max.powi(-2))));
    }
    Ok(rule)
}

/// Cached 8-point Gauss–Legendre rule on `[-1, 1]`.
pub(crate) fn legendre8() -> &'static [Node] {
    static RULE: OnceLock<Vec<Node>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8, (-1.0, 1.0)).expect("static rule"))
}

/// Cached 20-point Gauss–Legendre rule on `[-1, 1]`.
pub(crate) fn legendre20() -> &'static [Node] {
    static RULE: OnceLock<Vec<Node>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20, (-1.0, 1.0)).expect("static rule"))
}
