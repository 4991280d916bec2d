//! Collocation times, uniform in `ρ = √(τ − t₀)`, with breakpoints as nodes.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    tau: Vec<f64>,
    rho: Vec<f64>,
    /// Node indices that close a smooth segment (ascending, last node included).
    seg_ends: Vec<usize>,
}

impl TimeGrid {
    /// `nodes` equal steps in `ρ` over `[t₀, t_end]`; every breakpoint in
    /// `(t₀, t_end)` becomes a node, snapping a base node that lies within a
    /// quarter step.
    pub fn new(t0: f64, t_end: f64, nodes: usize, breaks: &[f64]) -> Result<Self> {
        if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::DegenerateInterval { a: t0, b: t_end });
        }
        if nodes < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 time nodes, got {nodes}")));
        }
        let rho_end = (t_end - t0).sqrt();
        let h = rho_end / nodes as f64;
        let mut rho: Vec<f64> = (0..=nodes).map(|m| m as f64 * h).collect();
        rho[nodes] = rho_end;
        let mut fixed = vec![false; nodes + 1];
        fixed[0] = true;
        fixed[nodes] = true;
        let mut extra = Vec::new();
        for &b in breaks {
            if !(b > t0 && b < t_end) {
                continue;
            }
            let rb = (b - t0).sqrt();
            let near = ((rb / h).round() as usize).min(nodes);
            if !fixed[near] && (rho[near] - rb).abs() < 0.25 * h {
                rho[near] = rb;
                fixed[near] = true;
            } else if (rho[near] - rb).abs() > 0.0 {
                extra.push(rb);
            } else {
                fixed[near] = true;
            }
        }
        let mut all: Vec<(f64, bool)> = rho.into_iter().zip(fixed).collect();
        all.extend(extra.into_iter().map(|r| (r, true)));
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 |= b.1;
                true
            } else {
                false
            }
        });
        let rho: Vec<f64> = all.iter().map(|p| p.0).collect();
        let tau = rho.iter().map(|r| t0 + r * r).collect::<Vec<_>>();
        let seg_ends = all.iter().enumerate().skip(1).filter(|(_, p)| p.1).map(|(i, _)| i).collect();
        Ok(Self { t0, tau, rho, seg_ends })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn t_end(&self) -> f64 {
        *self.tau.last().expect("grid has nodes")
    }

    /// Interval `i` with `ρ_i ≤ ρ ≤ ρ_{i+1}`.
    fn interval(&self, rho: f64) -> usize {
        let n = self.rho.len();
        self.rho.partition_point(|&r| r <= rho).saturating_sub(1).min(n - 2)
    }

    /// Lagrange stencil `(first node, weights, count)` in `ρ`, never
    /// reaching across a segment end.
    pub fn stencil(&self, rho: f64) -> (usize, [f64; 4], usize) {
        let i = self.interval(rho);
        let seg = self.seg_ends.partition_point(|&e| e <= i);
        let hi = self.seg_ends[seg.min(self.seg_ends.len() - 1)];
        let lo = if seg == 0 { 0 } else { self.seg_ends[seg - 1] };
        let count = (hi - lo + 1).min(4);
        let start = (i.saturating_sub(1)).clamp(lo, hi + 1 - count);
        let mut w = [0.0; 4];
        for (j, wj) in w.iter_mut().enumerate().take(count) {
            let rj = self.rho[start + j];
            let mut p = 1.0;
            for k in 0..count {
                if k != j {
                    let rk = self.rho[start + k];
                    p *= (rho - rk) / (rj - rk);
                }
            }
            *wj = p;
        }
        (start, w, count)
    }

    /// Piecewise-cubic interpolation in `ρ` of nodal `values`.
    pub fn interpolate(&self, values: &[Complex64], rho: f64) -> Complex64 {
        let (start, w, count) = self.stencil(rho);
        (0..count).map(|j| w[j] * values[start + j]).sum()
    }
}
