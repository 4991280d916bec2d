//! Compactly supported piecewise-cubic test functions.
//!
//! These stand in for Schwartz test functions. Everything downstream only
//! needs `ξ`, `ξ̇`, `∫ξ` and `∫ξ²` on intervals, which a C¹ (or C², for
//! [`TestFunction::clamped_spline`]) compactly supported cubic provides
//! exactly and cheaply.

use crate::error::{Error, Result};

/// 2-point Gauss–Legendre abscissa on [-1, 1].
const GL2: f64 = 0.577_350_269_189_625_8;
/// 4-point Gauss–Legendre rule on [-1, 1].
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFunction {
    /// Knots `s₀ = k₀ < k₁ < … < k_m = s₁`; empty for the zero function.
    knots: Vec<f64>,
    /// Cubic coefficients per piece in the local variable `u = t − k_i`.
    pieces: Vec<[f64; 4]>,
}

#[inline]
fn poly(c: &[f64; 4], u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}

#[inline]
fn dpoly(c: &[f64; 4], u: f64) -> f64 {
    (3.0 * c[3] * u + 2.0 * c[2]) * u + c[1]
}

impl TestFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Piecewise cubic Hermite interpolant through `(knots, values, slopes)`.
    ///
    /// The first and last value and slope must vanish, so the function is C¹
    /// on the whole line and identically zero outside `[knots[0], knots[m]]`.
    pub fn from_hermite(knots: &[f64], values: &[f64], slopes: &[f64]) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidTestFunction(msg.to_string()));
        if knots.len() < 2 {
            return bad("need at least two knots");
        }
        if values.len() != knots.len() || slopes.len() != knots.len() {
            return bad("knots, values and slopes must have equal length");
        }
        if knots.iter().chain(values).chain(slopes).any(|v| !v.is_finite()) {
            return bad("non-finite knot data");
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return bad("knots must be strictly increasing");
        }
        let last = knots.len() - 1;
        if values[0] != 0.0 || values[last] != 0.0 || slopes[0] != 0.0 || slopes[last] != 0.0 {
            return bad("value and slope must vanish at both ends of the support");
        }
        let pieces = (0..last)
            .map(|i| {
                let h = knots[i + 1] - knots[i];
                let (y0, y1, d0, d1) = (values[i], values[i + 1], slopes[i], slopes[i + 1]);
                let secant = (y1 - y0) / h;
                [y0, d0, (3.0 * secant - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * secant) / (h * h)]
            })
            .collect();
        Ok(Self { knots: knots.to_vec(), pieces })
    }

    /// C² cubic spline through `(knots, values)` with zero end slopes.
    pub fn clamped_spline(knots: &[f64], values: &[f64]) -> Result<Self> {
        if knots.len() < 2 || values.len() != knots.len() {
            return Err(Error::InvalidTestFunction(
                "clamped spline needs matching knots and values (at least two)".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTestFunction("knots must be strictly increasing".into()));
        }
        let n = knots.len();
        let mut slopes = vec![0.0; n];
        if n > 2 {
            // Thomas solve for the interior slopes.
            let m = n - 2;
            let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let mut sub = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut sup = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for j in 0..m {
                let i = j + 1;
                sub[j] = h[i];
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                sup[j] = h[i - 1];
                rhs[j] = 3.0
                    * (h[i] * (values[i] - values[i - 1]) / h[i - 1]
                        + h[i - 1] * (values[i + 1] - values[i]) / h[i]);
            }
            for j in 1..m {
                let w = sub[j] / diag[j - 1];
                diag[j] -= w * sup[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            slopes[m] = rhs[m - 1] / diag[m - 1];
            for j in (0..m - 1).rev() {
                slopes[j + 1] = (rhs[j] - sup[j] * slopes[j + 2]) / diag[j];
            }
        }
        Self::from_hermite(knots, values, &slopes)
    }

    /// Linear on `[a, b]` (value `start_value` at `a`, slope `slope`), joined
    /// to zero by cubic ramps of width `ramp` on either side.
    pub fn linear_window(start_value: f64, slope: f64, window: (f64, f64), ramp: f64) -> Result<Self> {
        let (a, b) = window;
        if !(ramp > 0.0) {
            return Err(Error::InvalidTestFunction("ramp width must be positive".into()));
        }
        let end_value = start_value + slope * (b - a);
        Self::from_hermite(
            &[a - ramp, a, b, b + ramp],
            &[0.0, start_value, end_value, 0.0],
            &[0.0, slope, slope, 0.0],
        )
    }

    /// Smooth single bump of height `amplitude` centred at `center`.
    pub fn bump(center: f64, half_width: f64, amplitude: f64) -> Result<Self> {
        Self::from_hermite(
            &[center - half_width, center, center + half_width],
            &[0.0, amplitude, 0.0],
            &[0.0, 0.0, 0.0],
        )
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Support `[s₀, s₁]`, or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.knots.first()?, *self.knots.last()?))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let (s0, s1) = self.support()?;
        if !(t >= s0 && t <= s1) {
            return None;
        }
        let idx = self.knots.partition_point(|&k| k <= t);
        Some(idx.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.locate(t) {
            Some(i) => poly(&self.pieces[i], t - self.knots[i]),
            None => 0.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.locate(t) {
            Some(i) => dpoly(&self.pieces[i], t - self.knots[i]),
            None => 0.0,
        }
    }

    /// One-sided (right) second derivative; it may jump at knots.
    pub fn second_derivative(&self, t: f64) -> f64 {
        match self.locate(t) {
            Some(i) => {
                let c = &self.pieces[i];
                6.0 * c[3] * (t - self.knots[i]) + 2.0 * c[2]
            }
            None => 0.0,
        }
    }

    /// Visit each piece overlapping `[a, b]` with its clipped local range.
    fn for_each_overlap(&self, a: f64, b: f64, mut f: impl FnMut(&[f64; 4], f64, f64)) {
        let Some((s0, s1)) = self.support() else { return };
        let lo = a.max(s0);
        let hi = b.min(s1);
        if !(hi > lo) {
            return;
        }
        let first = self.locate(lo).unwrap_or(0);
        for i in first..self.pieces.len() {
            let k0 = self.knots[i];
            let k1 = self.knots[i + 1];
            if k0 >= hi {
                break;
            }
            let p = lo.max(k0);
            let q = hi.min(k1);
            if q > p {
                f(&self.pieces[i], p - k0, q - k0);
            }
        }
    }

    /// `∫_a^b ξ(t) dt` (signed: swapping the limits flips the sign).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return -self.integral(b, a);
        }
        let mut acc = 0.0;
        self.for_each_overlap(a, b, |c, u0, u1| {
            let half = 0.5 * (u1 - u0);
            let mid = 0.5 * (u1 + u0);
            acc += half * (poly(c, mid - half * GL2) + poly(c, mid + half * GL2));
        });
        acc
    }

    /// `|ξ_{[a,b]}|² = ∫_a^b ξ(t)² dt`.
    pub fn l2_norm_sq(&self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut acc = 0.0;
        self.for_each_overlap(a, b, |c, u0, u1| {
            let half = 0.5 * (u1 - u0);
            let mid = 0.5 * (u1 + u0);
            acc += half * GL4.iter().map(|&(x, w)| w * poly(c, mid + half * x).powi(2)).sum::<f64>();
        });
        acc
    }

    /// `|ξ_{[a,b]ᶜ}|²`, the squared norm of the restriction to the complement.
    pub fn l2_norm_sq_complement(&self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.l2_norm_sq(f64::NEG_INFINITY, a) + self.l2_norm_sq(b, f64::INFINITY)
    }

    /// `|ξ|₀² = ∫_ℝ ξ²`.
    pub fn l2_norm_sq_total(&self) -> f64 {
        self.l2_norm_sq(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `(min, max)` of `ξ` over `[a, b]`, counting the zero value outside
    /// the support when the interval reaches it.
    pub fn range(&self, a: f64, b: f64) -> (f64, f64) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == b {
            let v = self.value(a);
            return (v, v);
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut touch = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        match self.support() {
            Some((s0, s1)) if a < s1 && b > s0 => {
                if a < s0 || b > s1 {
                    touch(0.0);
                }
            }
            _ => return (0.0, 0.0),
        }
        self.for_each_overlap(a, b, |c, u0, u1| {
            let mut consider = |u: f64| {
                if u >= u0 && u <= u1 {
                    touch(poly(c, u));
                }
            };
            consider(u0);
            consider(u1);
            // roots of 3c₃u² + 2c₂u + c₁
            let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
            if qa.abs() < 1e-300 {
                if qb.abs() > 1e-300 {
                    consider(-qc / qb);
                }
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let r = disc.sqrt();
                    consider((-qb + r) / (2.0 * qa));
                    consider((-qb - r) / (2.0 * qa));
                }
            }
        });
        (lo, hi)
    }

    /// `sup_{t ∈ [a,b]} |ξ(t)|`.
    pub fn sup_norm(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.range(a, b);
        lo.abs().max(hi.abs())
    }

    /// `sup_t |ξ(t)|` over the whole line.
    pub fn sup_norm_total(&self) -> f64 {
        self.sup_norm(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `(ξ(b) − ξ(a))/(b − a)` without cancellation for close arguments;
    /// `ξ'(a)` when `a == b`.
    pub fn secant(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.derivative(a);
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut acc = 0.0;
        self.for_each_overlap(lo, hi, |c, u0, u1| {
            let s = c[1] + c[2] * (u0 + u1) + c[3] * (u0 * u0 + u0 * u1 + u1 * u1);
            acc += s * (u1 - u0);
        });
        acc / (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> TestFunction {
        TestFunction::from_hermite(&[0.0, 0.3, 0.7, 1.2], &[0.0, 1.5, -0.4, 0.0], &[0.0, 2.0, 0.5, 0.0])
            .unwrap()
    }

    #[test]
    fn zero_outside_support() {
        let f = sample();
        assert_eq!(f.value(-0.1), 0.0);
        assert_eq!(f.value(1.3), 0.0);
        assert_eq!(f.derivative(5.0), 0.0);
        assert_eq!(f.value(0.0), 0.0);
        assert!(f.value(1.2).abs() < 1e-15);
    }

    #[test]
    fn secant_matches_difference_quotient() {
        let f = sample();
        for &(a, b) in &[(-0.5, 0.2), (0.1, 0.9), (0.25, 0.35), (1.0, 2.0), (0.5, 0.5)] {
            let want = if a == b { f.derivative(a) } else { (f.value(b) - f.value(a)) / (b - a) };
            assert!((f.secant(a, b) - want).abs() < 1e-12, "({a},{b})");
            assert_eq!(f.secant(a, b), f.secant(b, a));
        }
        // tiny separation straddling a knot stays close to the one-sided slopes
        let s = f.secant(0.3 - 1e-13, 0.3 + 1e-13);
        assert!((s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn continuity_at_knots() {
        let f = sample();
        for &k in &[0.3, 0.7] {
            let e = 1e-9;
            assert!((f.value(k - e) - f.value(k + e)).abs() < 1e-7);
            assert!((f.derivative(k - e) - f.derivative(k + e)).abs() < 1e-6);
        }
    }

    #[test]
    fn clamped_spline_is_c2() {
        let f = TestFunction::clamped_spline(&[0.0, 0.2, 0.5, 0.9, 1.0], &[0.0, 0.4, -0.3, 0.8, 0.0]).unwrap();
        for &k in &[0.2, 0.5, 0.9] {
            let left = f.second_derivative(k - 1e-12);
            let right = f.second_derivative(k);
            assert!((left - right).abs() < 1e-8, "jump at {k}: {left} vs {right}");
        }
    }

    #[test]
    fn linear_window_is_linear_inside() {
        let f = TestFunction::linear_window(0.5, -2.0, (0.2, 0.8), 0.1).unwrap();
        for &t in &[0.2, 0.35, 0.61, 0.8] {
            assert!((f.value(t) - (0.5 - 2.0 * (t - 0.2))).abs() < 1e-14);
            assert!((f.derivative(t) + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integrals_are_exact_for_cubics() {
        // ∫₀¹ of the single Hermite piece with y=(0,0), d=(0,0) is zero; use a
        // bump and compare with a fine midpoint sum.
        let f = sample();
        let n = 200_000;
        let h = 1.2 / n as f64;
        let mid: f64 = (0..n).map(|i| f.value((i as f64 + 0.5) * h)).sum::<f64>() * h;
        let mid2: f64 = (0..n).map(|i| f.value((i as f64 + 0.5) * h).powi(2)).sum::<f64>() * h;
        assert!((f.integral(-1.0, 2.0) - mid).abs() < 1e-9);
        assert!((f.l2_norm_sq_total() - mid2).abs() < 1e-9);
        assert!((f.integral(0.5, 0.1) + f.integral(0.1, 0.5)).abs() < 1e-16);
    }

    #[test]
    fn sup_norm_finds_interior_extremum() {
        let f = TestFunction::bump(0.0, 1.0, 2.5).unwrap();
        assert!((f.sup_norm_total() - 2.5).abs() < 1e-14);
        assert!(f.sup_norm(0.5, 0.6) < 2.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TestFunction::from_hermite(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]).is_err());
        assert!(TestFunction::from_hermite(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(TestFunction::from_hermite(&[0.0, f64::NAN], &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn restricted_norms_partition_total(
            vals in proptest::collection::vec(-2.0f64..2.0, 3),
            slopes in proptest::collection::vec(-3.0f64..3.0, 3),
            a in -0.5f64..1.5,
            len in 0.0f64..1.0,
        ) {
            let f = TestFunction::from_hermite(
                &[0.0, 0.25, 0.5, 0.8, 1.0],
                &[0.0, vals[0], vals[1], vals[2], 0.0],
                &[0.0, slopes[0], slopes[1], slopes[2], 0.0],
            ).unwrap();
            let b = a + len;
            let total = f.l2_norm_sq_total();
            let split = f.l2_norm_sq(a, b) + f.l2_norm_sq_complement(a, b);
            prop_assert!((split - total).abs() <= 1e-12 * total.max(1.0));
            prop_assert!(f.integral(a, b).is_finite());
            prop_assert!(f.sup_norm(a, b) <= f.sup_norm_total() + 1e-15);
        }
    }
}
