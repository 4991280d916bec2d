//! Small numeric helpers shared across modules.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `e^{iθ}` for real θ.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// `1/√(2πi·t)` on the principal branch, `√(i) = e^{iπ/4}`. Requires `t > 0`.
#[inline]
pub fn inv_sqrt_2pi_i(t: f64) -> Complex64 {
    cis(-FRAC_PI_4) / (2.0 * PI * t).sqrt()
}

/// `(2πi)^{-1/2}`.
#[inline]
pub fn inv_sqrt_2pi_i_unit() -> Complex64 {
    cis(-FRAC_PI_4) / (2.0 * PI).sqrt()
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator; real and imaginary parts are carried
/// independently, so the result depends only on the order of `add` calls.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(items: I) -> Complex64 {
    let mut acc = ComplexSum::default();
    for v in items {
        acc.add(v);
    }
    acc.value()
}

pub fn compensated_sum_real<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut acc = Neumaier::default();
    for v in items {
        acc.add(v);
    }
    acc.value()
}
