//! Reference integrators for integration tests, written independently of the
//! library's own quadrature.
#![allow(dead_code)]

use hidaprop::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// `(integral, error estimate, integral of |f|)` on one panel.
fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mass = fc.norm() * WGK[7];
    for j in 0..7 {
        let d = h * XGK[j];
        let (l, r) = (f(c - d), f(c + d));
        kron += (l + r) * WGK[j];
        mass += (l.norm() + r.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (l + r) * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm(), mass * h)
}

/// Adaptive Gauss–Kronrod (7/15) on `[a, b]` to absolute tolerance `tol`.
///
/// A panel is also accepted once its error estimate reaches roundoff
/// relative to the integral of `|f|` over it.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err, mass) = gk15(f, a, b);
        if err <= tol || err <= 1e-14 * mass || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}
