//! One order of the recursion evaluated at arbitrary space-time points.
//!
//! Each time integral over `(t₀, t)` is cut at the midpoint. On the lower
//! half the variable is `z = √(τ − t₀)`, on the upper half `z = √(t − τ)`;
//! either way the integrand becomes `e^{ic/z²}·G(z)` with `G` smooth, and
//! panels next to `z = 0` use the product rule from [`crate::singular`].

use super::grid::TimeGrid;
use super::Source;
use crate::kernel::SpaceTimePoint;
use crate::measure::{Path, SignedMeasure};
use crate::numeric::{cis, inv_sqrt_2pi_i, inv_sqrt_2pi_i_unit, ComplexSum, I};
use crate::quadrature::legendre8;
use crate::singular;
use crate::testfn::TestFunction;
use num_complex::Complex64;

/// A panel `[z_a, z_b]` counts as near the singular end when `z_a < NEAR_RATIO·(z_b − z_a)`.
const NEAR_RATIO: f64 = 4.0;
/// Largest phase swing of the companion factor tolerated on a near panel.
const NEAR_PHASE: f64 = 0.25;
/// Largest phase swing per 8-point Gauss–Legendre sub-panel.
const FAR_PHASE: f64 = 2.0;
const MAX_SPLIT: usize = 4096;
const MAX_DEPTH: usize = 8;
/// Each half is cut into at least this many panels whatever the grid.
const MIN_PANELS: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The order below the one being computed.
#[derive(Clone, Copy)]
pub(crate) enum Prev<'a> {
    /// Order zero, evaluated in closed form.
    Free,
    /// Stored nodal values per atom.
    Table(&'a [Vec<Complex64>]),
}

struct AtomView<'a> {
    weight: f64,
    path: &'a Path,
    /// `a(t₀) − x₀` for a point source.
    lead: f64,
    /// `lead²/2`, the phase constant of `K₀(a(τ),τ|x₀,t₀)`; zero for packets.
    c_low: f64,
}

pub(crate) struct Engine<'a> {
    v: &'a SignedMeasure,
    xi: &'a TestFunction,
    source: &'a Source,
    grid: &'a TimeGrid,
    atoms: Vec<AtomView<'a>>,
}

/// Integrand of one half: `e^{ic/z²}·G(z)` plus a phase-swing estimate for
/// the companion factor.
struct Half<'s> {
    c: f64,
    other: &'s dyn Fn(f64, f64) -> f64,
    g: &'s dyn Fn(f64) -> Complex64,
}

impl<'a> Engine<'a> {
    pub fn new(v: &'a SignedMeasure, xi: &'a TestFunction, source: &'a Source, grid: &'a TimeGrid) -> Self {
        let t0 = source.t0();
        let atoms = v
            .atoms()
            .iter()
            .map(|a| {
                let lead = match source {
                    Source::Point(p) => a.path.position(t0) - p.x,
                    Source::Packet { .. } => 0.0,
                };
                AtomView { weight: a.weight, path: &a.path, lead, c_low: 0.5 * lead * lead }
            })
            .collect();
        Self { v, xi, source, grid, atoms }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    fn is_point(&self) -> bool {
        matches!(self.source, Source::Point(_))
    }

    /// `K₀(x,t|y,τ)` for `t > τ`.
    fn free_kernel(&self, x: f64, t: f64, y: f64, tau: f64) -> Complex64 {
        let u = t - tau;
        let xi = self.xi;
        let d = xi.integral(tau, t) + x - y;
        let phase = y * xi.value(tau) - x * xi.value(t) - 0.5 * xi.l2_norm_sq(tau, t) + d * d / (2.0 * u);
        inv_sqrt_2pi_i(u) * cis(phase)
    }

    /// `K₀(a(τ),τ|x₀,t₀) · √l · e^{−ic/l}` with `l = τ − t₀`, smooth in `√l`.
    fn lower_factor(&self, k: usize, x0: f64, tau: f64) -> Complex64 {
        let atom = &self.atoms[k];
        let t0 = self.grid.t0();
        let xi = self.xi;
        let l = tau - t0;
        let drift_rate = if l > 0.0 { xi.integral(t0, tau) / l } else { xi.value(t0) };
        let q = drift_rate + atom.path.shape().secant(t0, tau);
        let y = atom.path.position(tau);
        let phase = x0 * xi.value(t0) - y * xi.value(tau) - 0.5 * xi.l2_norm_sq(t0, tau)
            + 0.5 * q * (2.0 * atom.lead + q * l);
        inv_sqrt_2pi_i_unit() * cis(phase)
    }

    /// `K₀(x,t|a(τ),τ) · √u · e^{−i(x − a(t))²/(2u)}` with `u = t − τ`.
    fn upper_factor(&self, x: f64, t: f64, path: &Path, tau: f64) -> Complex64 {
        let xi = self.xi;
        let u = t - tau;
        let d_ref = x - path.position(t);
        let drift_rate = if u > 0.0 { xi.integral(tau, t) / u } else { xi.value(t) };
        let q = drift_rate + path.shape().secant(tau, t);
        let y = path.position(tau);
        let phase = y * xi.value(tau) - x * xi.value(t) - 0.5 * xi.l2_norm_sq(tau, t) + 0.5 * q * (2.0 * d_ref + q * u);
        inv_sqrt_2pi_i_unit() * cis(phase)
    }

    /// Stored form of the previous order on atom `k` at time `τ`.
    fn stored_prev(&self, prev: Prev<'_>, k: usize, tau: f64) -> Complex64 {
        match prev {
            Prev::Table(t) => self.grid.interpolate(&t[k], (tau - self.grid.t0()).max(0.0).sqrt()),
            Prev::Free => match self.source {
                Source::Point(p) => self.lower_factor(k, p.x, tau),
                Source::Packet { .. } => {
                    let y = self.atoms[k].path.position(tau);
                    self.source.free_term(self.xi, SpaceTimePoint { x: y, t: tau }).unwrap_or(Complex64::new(f64::NAN, 0.0))
                }
            },
        }
    }

    /// The previous order itself on atom `k` at `τ > t₀`.
    fn full_prev(&self, prev: Prev<'_>, k: usize, tau: f64) -> Complex64 {
        let s = self.stored_prev(prev, k, tau);
        if self.is_point() {
            let l = tau - self.grid.t0();
            s * cis(self.atoms[k].c_low / l) / l.sqrt()
        } else {
            s
        }
    }

    /// Convert a value of `Kₙ(a_k(τ),τ)` to its stored form.
    pub fn to_stored(&self, k: usize, tau: f64, value: Complex64) -> Complex64 {
        let l = tau - self.grid.t0();
        if !self.is_point() {
            value
        } else if l > 0.0 {
            value * l.sqrt() * cis(-self.atoms[k].c_low / l)
        } else {
            ZERO
        }
    }

    /// `Kₙ(x,t) = −i Σ_k w_k ∫ f(τ) K₀(x,t|a_k(τ),τ) K_{n−1}(a_k(τ),τ) dτ`.
    pub fn eval(&self, prev: Prev<'_>, x: f64, t: f64) -> Complex64 {
        let t0 = self.grid.t0();
        let span = t - t0;
        if !(span > 0.0) || self.atoms.is_empty() {
            return ZERO;
        }
        debug_assert!(t <= self.grid.t_end() * (1.0 + 1e-12) + 1e-12);
        let half = 0.5 * span;
        let z_end = half.sqrt();
        let mid = t0 + half;
        let trim = |z: f64| z > 0.0 && z < z_end * (1.0 - 1e-12);
        let mut lower = vec![0.0];
        lower.extend(self.grid.rho().iter().copied().filter(|&z| trim(z)));
        lower.push(z_end);
        let mut upper = vec![0.0];
        upper.extend(
            self.grid.tau().iter().rev().filter(|&&tau| tau > mid && tau < t).map(|&tau| (t - tau).sqrt()).filter(|&z| trim(z)),
        );
        upper.push(z_end);
        let lower = refine(&lower, z_end / MIN_PANELS as f64);
        let upper = refine(&upper, z_end / MIN_PANELS as f64);

        let point = self.is_point();
        let mut total = ComplexSum::default();
        for (k, atom) in self.atoms.iter().enumerate() {
            if atom.weight == 0.0 {
                continue;
            }
            let w2 = 2.0 * atom.weight;

            let pos_at = |z: f64| atom.path.position(t0 + z * z);
            let lower_g = |z: f64| {
                let tau = t0 + z * z;
                let y = atom.path.position(tau);
                let jac = if point { w2 } else { w2 * z };
                jac * self.free_kernel(x, t, y, tau) * self.stored_prev(prev, k, tau)
            };
            let lower_other = |za: f64, zb: f64| {
                let d = (x - pos_at(za)).abs().max((x - pos_at(zb)).abs());
                0.5 * d * d * (1.0 / (span - zb * zb) - 1.0 / (span - za * za)).abs()
            };
            let lower_half = Half { c: atom.c_low, other: &lower_other, g: &lower_g };
            total.add(self.integrate(&lower, &lower_half, |z| t0 + z * z));

            let d_ref = x - atom.path.position(t);
            let upper_g = |z: f64| {
                let tau = t - z * z;
                w2 * self.upper_factor(x, t, atom.path, tau) * self.full_prev(prev, k, tau)
            };
            let c_low = atom.c_low;
            let upper_other =
                move |za: f64, zb: f64| c_low * (1.0 / (span - zb * zb) - 1.0 / (span - za * za)).abs();
            let upper_half = Half { c: 0.5 * d_ref * d_ref, other: &upper_other, g: &upper_g };
            total.add(self.integrate(&upper, &upper_half, |z| t - z * z));
        }
        -I * total.value()
    }

    fn integrate(&self, nodes: &[f64], half: &Half<'_>, time_of: impl Fn(f64) -> f64) -> Complex64 {
        let mut acc = ComplexSum::default();
        for w in nodes.windows(2) {
            let f = self.v.f(time_of(0.5 * (w[0] + w[1])));
            if f != 0.0 {
                acc.add(f * panel(w[0], w[1], half, 0));
            }
        }
        acc.value()
    }
}

/// Insert uniform points so no gap exceeds `max_gap`.
fn refine(nodes: &[f64], max_gap: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len() + MIN_PANELS);
    out.push(nodes[0]);
    for w in nodes.windows(2) {
        let n = ((w[1] - w[0]) / max_gap).ceil().max(1.0) as usize;
        for j in 1..n {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
        }
        out.push(w[1]);
    }
    out
}

fn panel(za: f64, zb: f64, half: &Half<'_>, depth: usize) -> Complex64 {
    let width = zb - za;
    if !(width > 0.0) {
        return ZERO;
    }
    let other = (half.other)(za, zb);
    if za < NEAR_RATIO * width {
        if other > NEAR_PHASE && depth < MAX_DEPTH {
            let n = ((other / NEAR_PHASE).ceil() as usize).clamp(2, 64);
            let step = width / n as f64;
            let mut acc = ComplexSum::default();
            for j in 0..n {
                let hi = if j + 1 == n { zb } else { za + (j + 1) as f64 * step };
                acc.add(panel(za + j as f64 * step, hi, half, depth + 1));
            }
            return acc.value();
        }
        let weights = singular::panel_weights(za, zb, half.c);
        singular::rule_nodes().iter().zip(weights).map(|(&eta, wt)| wt * (half.g)(za + width * eta)).sum()
    } else {
        let swing = half.c * (1.0 / (za * za) - 1.0 / (zb * zb)) + other;
        let n = ((swing / FAR_PHASE).ceil() as usize).clamp(1, MAX_SPLIT);
        let step = width / n as f64;
        let mut acc = ComplexSum::default();
        for j in 0..n {
            let a = za + j as f64 * step;
            let hh = 0.5 * step;
            let m = a + hh;
            for &(x, wt) in legendre8() {
                let z = m + hh * x;
                acc.add(wt * hh * cis(half.c / (z * z)) * (half.g)(z));
            }
        }
        acc.value()
    }
}
