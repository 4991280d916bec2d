//! Atomic-in-space, density-in-time potentials and their admissibility.

use crate::error::{Error, Result};
use crate::testfn::TestFunction;
use serde::Serialize;

/// Trajectory `a(t) = offset + shape(t)` of a moving atom.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    offset: f64,
    shape: TestFunction,
}

impl Path {
    pub fn fixed(x: f64) -> Self {
        Self { offset: x, shape: TestFunction::zero() }
    }

    pub fn moving(offset: f64, shape: TestFunction) -> Self {
        Self { offset, shape }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn shape(&self) -> &TestFunction {
        &self.shape
    }

    pub fn is_static(&self) -> bool {
        self.shape.is_zero()
    }

    pub fn position(&self, t: f64) -> f64 {
        self.offset + self.shape.value(t)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.shape.derivative(t)
    }

    /// `sup_{t ∈ [a,b]} |a(t)|`.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.shape.range(a, b);
        (self.offset + lo).abs().max((self.offset + hi).abs())
    }

    /// Knots where the trajectory is only C¹.
    pub fn breakpoints(&self) -> &[f64] {
        self.shape.knots()
    }
}

/// Piecewise-constant time density `f`, zero outside its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDensity {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl TimeDensity {
    /// `values[i]` holds on `[breaks[i], breaks[i+1])`.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(Error::InvalidMeasure(
                "time density needs n+1 breakpoints for n values".into(),
            ));
        }
        if breaks.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("time density must be finite (bounded)".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("time density breakpoints must increase".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: f64, window: (f64, f64)) -> Result<Self> {
        Self::new(vec![window.0, window.1], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right-continuous evaluation.
    pub fn value(&self, t: f64) -> f64 {
        let last = self.breaks.len() - 1;
        if !(t >= self.breaks[0] && t < self.breaks[last]) {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b <= t) - 1;
        self.values[i]
    }

    fn fold_pieces(&self, a: f64, b: f64, mut f: impl FnMut(f64, f64)) {
        for (i, &v) in self.values.iter().enumerate() {
            let lo = self.breaks[i].max(a);
            let hi = self.breaks[i + 1].min(b);
            if hi > lo {
                f(v, hi - lo);
            }
        }
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        self.fold_pieces(a, b, |v, len| s += v * len);
        s
    }

    /// `∫_a^b |f|`.
    pub fn l1_norm(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        self.fold_pieces(a, b, |v, len| s += v.abs() * len);
        s
    }

    /// Essential supremum of `|f|` on `[a, b]`.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0f64;
        self.fold_pieces(a, b, |v, _| s = s.max(v.abs()));
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub path: Path,
}

impl Atom {
    pub fn fixed(weight: f64, x: f64) -> Self {
        Self { weight, path: Path::fixed(x) }
    }
}

/// Declared Gaussian-decay constants `(R, β)` of condition i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decay {
    pub radius: f64,
    pub beta: f64,
}

impl Default for Decay {
    fn default() -> Self {
        Self { radius: 1.0, beta: 1.0 }
    }
}

/// `v(dx, dt) = f(t) dt · Σ_k w_k δ(x − a_k(t))` restricted to `ℝ × Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    atoms: Vec<Atom>,
    density: TimeDensity,
    window: (f64, f64),
    decay: Decay,
}

impl SignedMeasure {
    pub fn new(atoms: Vec<Atom>, density: TimeDensity, window: (f64, f64), decay: Decay) -> Result<Self> {
        let m = Self { atoms, density, window, decay };
        m.check_structure()?;
        Ok(m)
    }

    /// The zero potential on `window`.
    pub fn empty(window: (f64, f64)) -> Result<Self> {
        Self::new(Vec::new(), TimeDensity::constant(0.0, window)?, window, Decay::default())
    }

    /// One static atom of weight `w` at `x` with `f ≡ 1` on the window.
    pub fn single_static(weight: f64, x: f64, window: (f64, f64)) -> Result<Self> {
        Self::new(vec![Atom::fixed(weight, x)], TimeDensity::constant(1.0, window)?, window, Decay::default())
    }

    fn check_structure(&self) -> Result<()> {
        let (a, b) = self.window;
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::DegenerateInterval { a, b });
        }
        if !(self.decay.radius >= 0.0 && self.decay.radius.is_finite()) {
            return Err(Error::InvalidMeasure("decay radius R must be finite and non-negative".into()));
        }
        if !(self.decay.beta > 0.0 && self.decay.beta.is_finite()) {
            return Err(Error::InvalidMeasure("decay rate beta must be positive".into()));
        }
        for (k, atom) in self.atoms.iter().enumerate() {
            if !atom.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {k}: non-finite weight")));
            }
            if !atom.path.offset().is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {k}: unbounded path")));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &TimeDensity {
        &self.density
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn window_len(&self) -> f64 {
        self.window.1 - self.window.0
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    /// True when no atom carries weight or the density vanishes on the window.
    pub fn is_null(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) || self.f_l1() == 0.0
    }

    /// `f` restricted to the window.
    pub fn f(&self, t: f64) -> f64 {
        if t < self.window.0 || t >= self.window.1 {
            0.0
        } else {
            self.density.value(t)
        }
    }

    /// `‖f‖_{L¹(Δ)}`.
    pub fn f_l1(&self) -> f64 {
        self.density.l1_norm(self.window.0, self.window.1)
    }

    /// `|v_t|_∞ = Σ|w_k| · sup_Δ |f|`.
    pub fn vt_inf(&self) -> f64 {
        let w: f64 = self.atoms.iter().map(|a| a.weight.abs()).sum();
        w * self.density.sup_abs(self.window.0, self.window.1)
    }

    /// Times in `(a, b)` where `f` jumps or a path loses smoothness.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .density
            .breakpoints()
            .iter()
            .chain(self.atoms.iter().flat_map(|at| at.path.breakpoints()))
            .chain([self.window.0, self.window.1].iter())
            .copied()
            .filter(|&t| t > a && t < b)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Hölder exponents and Gaussian weight for the constant
/// `Q = (Σ_k |w_k|·‖f‖₁·e^{γ q r_k²})^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Holder {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

impl Holder {
    /// `q = 3` (so `p = 3/2`) and `γ = β/(2q)`.
    pub fn for_decay(decay: Decay) -> Self {
        let q = 3.0;
        Self { p: q / (q - 1.0), q, gamma: decay.beta / (2.0 * q) }
    }
}

/// A radius at which the tail mass exceeds the declared Gaussian envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayViolation {
    pub radius: f64,
    pub tail_mass: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationResult {
    pub condition_i: bool,
    pub condition_ii: bool,
    pub violations: Vec<DecayViolation>,
    pub vt_inf: f64,
    pub total_mass: f64,
    pub holder: Holder,
    pub holder_q: f64,
    /// `q > 2` and `γ < β/q`, the range in which the estimate applies.
    pub holder_admissible: bool,
}

impl ValidationResult {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii
    }
}

/// Check conditions i) and ii) and report `|v_t|_∞` and the Hölder constant.
///
/// Condition i) bounds the tail mass `|v_x|({|x| > r})` for every `r > R`.
/// Each atom is placed at `r_k = sup_Δ |a_k|` with mass `|w_k|·‖f‖₁`, which
/// dominates the true marginal tail. The tail is a step function, so it
/// suffices to test just below each `r_k > R`.
pub fn validate_measure(m: &SignedMeasure, holder: Holder) -> Result<ValidationResult> {
    m.check_structure()?;
    let (t0, t1) = m.window();
    let f1 = m.f_l1();
    let mut placed: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .map(|a| (a.path.sup_abs(t0, t1), a.weight.abs() * f1))
        .collect();
    if placed.iter().any(|(r, w)| !r.is_finite() || !w.is_finite()) {
        return Err(Error::InvalidMeasure("unbounded path or weight".into()));
    }
    placed.sort_by(|a, b| b.0.total_cmp(&a.0));

    let Decay { radius, beta } = m.decay();
    let mut violations = Vec::new();
    let mut tail = 0.0;
    let mut i = 0;
    while i < placed.len() {
        let r = placed[i].0;
        while i < placed.len() && placed[i].0 == r {
            tail += placed[i].1;
            i += 1;
        }
        if r <= radius {
            break;
        }
        let envelope = (-beta * r * r).exp();
        if tail > envelope {
            violations.push(DecayViolation { radius: r, tail_mass: tail, envelope });
        }
    }

    let vt_inf = m.vt_inf();
    let total_mass: f64 = placed.iter().map(|p| p.1).sum();

    // log-sum-exp keeps Q finite for far atoms with tiny weights
    let logs: Vec<f64> = placed
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(r, w)| w.ln() + holder.gamma * holder.q * r * r)
        .collect();
    let holder_q = if logs.is_empty() {
        0.0
    } else {
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        ((top + s.ln()) / holder.q).exp()
    };
    let holder_admissible = holder.q > 2.0
        && holder.gamma > 0.0
        && holder.gamma < beta / holder.q
        && (1.0 / holder.p + 1.0 / holder.q - 1.0).abs() < 1e-12;

    Ok(ValidationResult {
        condition_i: violations.is_empty(),
        condition_ii: vt_inf.is_finite(),
        violations,
        vt_inf,
        total_mass,
        holder,
        holder_q,
        holder_admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TimeDensity {
        TimeDensity::constant(1.0, (0.0, 1.0)).unwrap()
    }

    fn comb(beta: f64) -> SignedMeasure {
        let atoms = (-3..=3).map(|n: i32| Atom::fixed((-(n * n) as f64).exp(), n as f64)).collect();
        SignedMeasure::new(atoms, unit(), (0.0, 1.0), Decay { radius: 0.0, beta }).unwrap()
    }

    #[test]
    fn single_static_atom_passes() {
        let m = SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0)).unwrap();
        let r = validate_measure(&m, Holder::for_decay(m.decay())).unwrap();
        assert!(r.passed());
        assert_eq!(r.vt_inf, 0.5);
    }

    #[test]
    fn far_heavy_atom_violates_decay() {
        let m = SignedMeasure::new(
            vec![Atom::fixed(1.0, 10.0)],
            unit(),
            (0.0, 1.0),
            Decay { radius: 5.0, beta: 1.0 },
        )
        .unwrap();
        let r = validate_measure(&m, Holder::for_decay(m.decay())).unwrap();
        assert!(!r.condition_i);
        assert!(r.condition_ii);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].radius, 10.0);
    }

    #[test]
    fn gaussian_comb_tail_mass() {
        // Tail mass just below r = 1 is 2(e⁻¹ + e⁻⁴ + e⁻⁹) ≈ 0.7727, so the
        // comb is admissible for β ≤ −ln 0.7727 ≈ 0.2578.
        let ok = validate_measure(&comb(0.25), Holder::for_decay(comb(0.25).decay())).unwrap();
        assert!(ok.condition_i, "{:?}", ok.violations);
        let tight = validate_measure(&comb(1.0), Holder::for_decay(comb(1.0).decay())).unwrap();
        assert!(!tight.condition_i);
        assert_eq!(tight.violations.len(), 3);
    }

    #[test]
    fn moving_atom_uses_path_supremum() {
        let shape = TestFunction::bump(0.5, 0.4, 6.0).unwrap();
        let atom = Atom { weight: 1e-3, path: Path::moving(0.0, shape) };
        let m = SignedMeasure::new(vec![atom], unit(), (0.0, 1.0), Decay { radius: 1.0, beta: 1.0 }).unwrap();
        let r = validate_measure(&m, Holder::for_decay(m.decay())).unwrap();
        assert!(!r.condition_i);
        assert!((r.violations[0].radius - 6.0).abs() < 1e-12);
    }

    #[test]
    fn holder_constant_matches_direct_sum() {
        let m = comb(0.25);
        let h = Holder { p: 1.5, q: 3.0, gamma: 0.05 };
        let r = validate_measure(&m, h).unwrap();
        let direct: f64 = (-3..=3)
            .map(|n: i32| (-(n * n) as f64).exp() * (0.05 * 3.0 * (n * n) as f64).exp())
            .sum::<f64>()
            .powf(1.0 / 3.0);
        assert!((r.holder_q - direct).abs() < 1e-13 * direct);
        assert!(r.holder_admissible);
        let bad = validate_measure(&m, Holder { p: 2.0, q: 2.0, gamma: 0.05 }).unwrap();
        assert!(!bad.holder_admissible);
    }

    #[test]
    fn structural_errors() {
        assert!(SignedMeasure::new(vec![Atom::fixed(f64::NAN, 0.0)], unit(), (0.0, 1.0), Decay::default()).is_err());
        assert!(SignedMeasure::new(vec![Atom::fixed(1.0, f64::INFINITY)], unit(), (0.0, 1.0), Decay::default()).is_err());
        assert!(SignedMeasure::empty((1.0, 1.0)).is_err());
        assert!(TimeDensity::new(vec![0.0, 1.0], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn density_queries() {
        let f = TimeDensity::new(vec![0.0, 0.5, 1.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(f.value(0.25), 2.0);
        assert_eq!(f.value(0.5), -1.0);
        assert_eq!(f.value(1.0), 0.0);
        assert!((f.integral(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((f.l1_norm(0.25, 0.75) - 0.75).abs() < 1e-15);
        assert_eq!(f.sup_abs(0.6, 0.9), 1.0);
    }
}
