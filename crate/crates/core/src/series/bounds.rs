//! Certified term bounds and the simplex Γ-integral.

use crate::error::{Error, Result};
use crate::numeric::ln_gamma;
use std::f64::consts::{LN_2, PI};

/// `M₀ = 1/√(2π|t − t₀|)`, the exact modulus of the free term.
pub fn bound_m0(span: f64) -> f64 {
    1.0 / (2.0 * PI * span).sqrt()
}

/// `Mₙ = vⁿ |Δ|^{(n−1)/2} / (2^{(n+1)/2} Γ((n+1)/2))` for `n ≥ 1`.
pub fn bound_mn(n: usize, vt_inf: f64, window_len: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("Mn is defined for n >= 1; use bound_m0".into()));
    }
    if !(vt_inf >= 0.0 && vt_inf.is_finite()) {
        return Err(Error::InvalidParameter(format!("|v_t|_inf must be finite and >= 0, got {vt_inf}")));
    }
    if !(window_len > 0.0 && window_len.is_finite()) {
        return Err(Error::InvalidParameter(format!("window length must be positive, got {window_len}")));
    }
    Ok(mn_unchecked(n, vt_inf, window_len))
}

fn mn_unchecked(n: usize, v: f64, len: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln = nf * v.ln() + 0.5 * (nf - 1.0) * len.ln() - 0.5 * (nf + 1.0) * LN_2 - ln_gamma(0.5 * (nf + 1.0));
    ln.exp()
}

/// `Σ_{m>n} M_m`, summed until the terms no longer move the total.
pub fn tail_bound(n: usize, vt_inf: f64, window_len: f64) -> f64 {
    if vt_inf == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut m = n + 1;
    loop {
        let term = mn_unchecked(m, vt_inf, window_len);
        sum += term;
        // M_{m+1}/M_m ≈ v·√(|Δ|/m), so past that point the terms fall off
        let decaying = (m as f64) > 4.0 * vt_inf * vt_inf * window_len;
        if !sum.is_finite() || (decaying && term <= f64::EPSILON * sum) || m > 100_000 {
            return sum;
        }
        m += 1;
    }
}

/// Smallest `n ≥ 0` with `tail_bound(n) < tol`, or a truncation report at `cap`.
pub fn truncation_order(tol: f64, vt_inf: f64, window_len: f64, cap: usize) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    for n in 0..=cap {
        if tail_bound(n, vt_inf, window_len) < tol {
            return Ok(n);
        }
    }
    Err(Error::TruncationUnreachable { tol, order: cap, best_tail: tail_bound(cap, vt_inf, window_len) })
}

/// `∫_{Δₙ} Π_{j=1}^{n+1} (2π|t_j − t_{j−1}|)^{−α} dt₁…dtₙ
///   = (Γ(1−α)/(2π)^α)^{n+1} |t − t₀|^{n(1−α)−α} / Γ((n+1)(1−α))`.
pub fn simplex_gamma_integral(n: usize, alpha: f64, window: (f64, f64)) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("simplex dimension must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let span = window.1 - window.0;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::DegenerateInterval { a: window.0, b: window.1 });
    }
    let nf = n as f64;
    let ln = (nf + 1.0) * (ln_gamma(1.0 - alpha) - alpha * (2.0 * PI).ln())
        + (nf * (1.0 - alpha) - alpha) * span.ln()
        - ln_gamma((nf + 1.0) * (1.0 - alpha));
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mn_examples() {
        assert!((bound_mn(1, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((bound_mn(2, 1.0, 1.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((bound_mn(3, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(bound_mn(0, 1.0, 1.0).is_err());
        assert_eq!(bound_mn(4, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn simplex_examples() {
        assert!((simplex_gamma_integral(1, 0.5, (0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((simplex_gamma_integral(2, 0.5, (0.0, 1.0)).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
        // α = 0: plain simplex volume |t − t₀|ⁿ/n!
        let v = simplex_gamma_integral(3, 0.0, (1.0, 3.0)).unwrap();
        assert!((v - 8.0 / 6.0).abs() < 1e-14);
        assert!(simplex_gamma_integral(2, 1.0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn mn_is_simplex_integral_scaled() {
        // with v = 1 on a unit window the two formulas coincide term by term
        for n in 1..8 {
            let m = bound_mn(n, 1.0, 1.0).unwrap();
            let s = simplex_gamma_integral(n, 0.5, (0.0, 1.0)).unwrap();
            assert!((m - s).abs() < 1e-14 * m, "n={n}: {m} vs {s}");
        }
    }

    #[test]
    fn tail_for_unit_data_reaches_1e8_by_order_20() {
        let n = truncation_order(1e-8, 1.0, 1.0, 40).unwrap();
        assert!(n <= 20);
        assert!(tail_bound(n, 1.0, 1.0) < 1e-8);
        assert!(n == 0 || tail_bound(n - 1, 1.0, 1.0) >= 1e-8);
    }

    #[test]
    fn unreachable_tolerance_reports_best_tail() {
        match truncation_order(1e-30, 1.0, 1.0, 25) {
            Err(Error::TruncationUnreachable { order, best_tail, .. }) => {
                assert_eq!(order, 25);
                assert!(best_tail > 1e-30 && best_tail < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }
}
