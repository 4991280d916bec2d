use crate::error::{Error, Result};
use crate::measure::SignedMeasure;
use crate::testfn::TestFunction;
use std::f64::consts::PI;

/// `W_ε(x,t) = f(t) Σ_k w_k ρ_ε(x − a_k(t)) + ξ̇(t)x` with the unit-mass
/// Gaussian `ρ_ε` of width `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedPotential {
    pub source: SignedMeasure,
    pub epsilon: f64,
    /// Adds `ξ̇(t)x` when present.
    pub drive: Option<TestFunction>,
}

impl MollifiedPotential {
    pub fn new(source: SignedMeasure, epsilon: f64, drive: Option<TestFunction>) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("mollifier width must be positive, got {epsilon}")));
        }
        Ok(Self { source, epsilon, drive })
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let mut v = 0.0;
        let f = self.source.f(t);
        if f != 0.0 {
            let norm = 1.0 / (self.epsilon * (2.0 * PI).sqrt());
            for atom in self.source.atoms() {
                let u = (x - atom.path.position(t)) / self.epsilon;
                // e^{−u²/2} underflows to zero well before this
                if u * u < 1500.0 {
                    v += atom.weight * norm * (-0.5 * u * u).exp();
                }
            }
            v *= f;
        }
        if let Some(xi) = &self.drive {
            v += xi.derivative(t) * x;
        }
        v
    }

    /// `∫ x^m (W_ε − ξ̇x) dx`, exactly.
    pub fn atom_moment(&self, t: f64, m: u32) -> f64 {
        let f = self.source.f(t);
        self.source
            .atoms()
            .iter()
            .map(|atom| {
                let a = atom.path.position(t);
                // E[(a + εZ)^m] with Z standard normal
                let mut s = 0.0;
                let mut binom = 1.0;
                for j in 0..=m {
                    if j % 2 == 0 {
                        s += binom * a.powi((m - j) as i32) * self.epsilon.powi(j as i32) * double_factorial(j);
                    }
                    binom = binom * (m - j) as f64 / (j + 1) as f64;
                }
                atom.weight * s
            })
            .sum::<f64>()
            * f
    }
}

/// `(j − 1)!!` for even `j`, the `j`-th moment of a standard normal.
fn double_factorial(j: u32) -> f64 {
    (1..j).step_by(2).map(|k| k as f64).product()
}
