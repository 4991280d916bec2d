use super::packet::{Field, InitialState, SpatialGrid};
use super::potential::MollifiedPotential;
use crate::error::{Error, Result};
use crate::numeric::I;
use num_complex::Complex64;

/// `dt/dx²` above which the run carries an accuracy warning. The scheme is
/// stable for any ratio, but its dispersion error grows with it.
pub const ACCURACY_RATIO: f64 = 10.0;

/// Edge mass above which the run carries a boundary warning.
const EDGE_MASS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CnRun {
    /// Evenly spaced snapshots, first at `t0`, last at `t_end`.
    pub fields: Vec<Field>,
    pub steps: usize,
    pub dt: f64,
    /// `max_n |‖ψⁿ‖² − ‖ψ⁰‖²|`.
    pub norm_drift: f64,
    /// Largest `|ψ|²` mass within 5% of either wall over the snapshots.
    pub edge_mass: f64,
    pub warnings: Vec<String>,
}

impl CnRun {
    pub fn last(&self) -> &Field {
        self.fields.last().expect("at least one snapshot")
    }
}

/// Crank–Nicolson for `i∂_tψ = (−½∂_x² + W)ψ` with `ψ = 0` at the walls.
///
/// The step is rounded so that a whole number of steps spans `[t0, t_end]`;
/// `W` is sampled at each half step.
pub fn crank_nicolson_evolve(
    psi0: &InitialState,
    pot: &MollifiedPotential,
    grid: SpatialGrid,
    dt: f64,
    t0: f64,
    t_end: f64,
    snapshots: usize,
) -> Result<CnRun> {
    if !(t_end > t0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("need t_end > t0 and dt > 0, got [{t0}, {t_end}], dt = {dt}")));
    }
    if grid.len < 3 {
        return Err(Error::InvalidParameter("grid needs at least three points".into()));
    }
    let steps = ((t_end - t0) / dt).ceil().max(1.0) as usize;
    let dt = (t_end - t0) / steps as f64;
    let mut warnings = Vec::new();
    let ratio = dt / (grid.dx * grid.dx);
    if ratio > ACCURACY_RATIO {
        warnings.push(format!("dt/dx² = {ratio:.3} exceeds {ACCURACY_RATIO}: expect dispersion error"));
    }
    let snapshots = snapshots.max(2);
    let save_at: Vec<usize> = (0..snapshots).map(|k| (k * steps + (snapshots - 1) / 2) / (snapshots - 1)).collect();

    let n = grid.len;
    let xs = grid.points();
    let mut psi = psi0.sample(grid)?;
    let norm0 = norm_sq(&psi, grid.dx);
    let width = 0.05 * (grid.x_max() - grid.x_min);
    let mut fields = vec![Field { grid, t: t0, values: psi.clone() }];
    let mut next_save = 1;
    let mut norm_drift: f64 = 0.0;

    let off = -I * (dt / (4.0 * grid.dx * grid.dx));
    let kinetic = 1.0 / (grid.dx * grid.dx);
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for step in 1..=steps {
        let tm = t0 + (step as f64 - 0.5) * dt;
        for j in 0..n {
            let h = kinetic + pot.value(xs[j], tm);
            let half = I * (0.5 * dt * h);
            diag[j] = 1.0 + half;
            let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { psi[j + 1] } else { Complex64::new(0.0, 0.0) };
            rhs[j] = (1.0 - half) * psi[j] - off * (left + right);
        }
        thomas(off, &diag, &mut rhs, &mut scratch);
        psi.copy_from_slice(&rhs);
        norm_drift = norm_drift.max((norm_sq(&psi, grid.dx) - norm0).abs());
        if next_save < save_at.len() && step == save_at[next_save] {
            fields.push(Field { grid, t: if step == steps { t_end } else { t0 + step as f64 * dt }, values: psi.clone() });
            next_save += 1;
        }
    }
    let edge_mass = fields.iter().map(|f| f.edge_mass(width)).fold(0.0, f64::max);
    if edge_mass > EDGE_MASS {
        warnings.push(format!("mass {edge_mass:.3e} near the walls exceeds {EDGE_MASS:e}: widen the domain"));
    }
    Ok(CnRun { fields, steps, dt, norm_drift, edge_mass, warnings })
}

fn norm_sq(psi: &[Complex64], dx: f64) -> f64 {
    psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx
}

/// Solve the symmetric tridiagonal system with constant off-diagonal `off`
/// in place of `rhs`.
fn thomas(off: Complex64, diag: &[Complex64], rhs: &mut [Complex64], c: &mut [Complex64]) {
    let n = diag.len();
    c[0] = off / diag[0];
    rhs[0] /= diag[0];
    for j in 1..n {
        let m = diag[j] - off * c[j - 1];
        c[j] = off / m;
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / m;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= c[j] * next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SignedMeasure;
    use crate::oracle::WavePacket;
    use crate::testfn::TestFunction;

    fn free(eps: f64, drive: Option<TestFunction>) -> MollifiedPotential {
        MollifiedPotential::new(SignedMeasure::empty((0.0, 1.0)).unwrap(), eps, drive).unwrap()
    }

    #[test]
    fn thomas_solves_tridiagonal() {
        let off = Complex64::new(0.3, -0.2);
        let diag: Vec<_> = (0..6).map(|j| Complex64::new(2.0 + j as f64, 0.5)).collect();
        let x: Vec<_> = (0..6).map(|j| Complex64::new(j as f64 - 2.0, 1.0 / (j + 1) as f64)).collect();
        let mut b: Vec<_> = (0..6)
            .map(|j| diag[j] * x[j] + if j > 0 { off * x[j - 1] } else { 0.0.into() } + if j < 5 { off * x[j + 1] } else { 0.0.into() })
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); 6];
        thomas(off, &diag, &mut b, &mut scratch);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn free_packet_follows_closed_form() {
        // slow and wide: the three-point Laplacian's phase error scales with k⁴dx²
        let p = WavePacket::new(0.0, 0.0, 2.0).unwrap();
        let zero = TestFunction::zero();
        let grid = SpatialGrid::symmetric(p.suggested_half_width(&zero, 0.0, 1.0), 0.01).unwrap();
        let run = crank_nicolson_evolve(&InitialState::Gaussian(p), &free(0.1, None), grid, 1e-4, 0.0, 1.0, 2).unwrap();
        let exact = p.free_field(&zero, 0.0, 1.0, grid).unwrap();
        let err = run.last().l2_distance(&exact).unwrap();
        assert!(err < 1e-6, "{err:e}");
        assert!(run.norm_drift < 1e-8, "{}", run.norm_drift);
        assert!(run.warnings.is_empty(), "{:?}", run.warnings);
    }

    #[test]
    fn driven_packet_follows_closed_form() {
        // ξ linear on [0, 1], so the force ξ̇ is constant there
        let xi = TestFunction::linear_window(0.0, 0.25, (0.0, 1.0), 0.5).unwrap();
        let p = WavePacket::new(0.0, 0.0, 2.0).unwrap();
        let grid = SpatialGrid::symmetric(p.suggested_half_width(&xi, 0.0, 1.0), 0.01).unwrap();
        let run = crank_nicolson_evolve(&InitialState::Gaussian(p), &free(0.1, Some(xi.clone())), grid, 1e-4, 0.0, 1.0, 2)
            .unwrap();
        let exact = p.free_field(&xi, 0.0, 1.0, grid).unwrap();
        let err = run.last().l2_distance(&exact).unwrap();
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn halving_steps_shrinks_error_fourfold() {
        let p = WavePacket::new(-0.5, 1.0, 0.8).unwrap();
        let zero = TestFunction::zero();
        let half_width = p.suggested_half_width(&zero, 0.0, 0.5);
        let err = |dx: f64, dt: f64| {
            let grid = SpatialGrid::symmetric(half_width, dx).unwrap();
            let run = crank_nicolson_evolve(&InitialState::Gaussian(p), &free(0.1, None), grid, dt, 0.0, 0.5, 2).unwrap();
            run.last().l2_distance(&p.free_field(&zero, 0.0, 0.5, grid).unwrap()).unwrap()
        };
        let (coarse, fine) = (err(0.04, 4e-3), err(0.02, 2e-3));
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{coarse:e} / {fine:e} = {ratio}");
    }

    #[test]
    fn snapshots_and_warnings() {
        let p = WavePacket::new(0.0, 0.0, 0.3).unwrap();
        let grid = SpatialGrid::symmetric(1.0, 0.01).unwrap();
        let run = crank_nicolson_evolve(&InitialState::Gaussian(p), &free(0.1, None), grid, 0.01, 0.0, 1.0, 5).unwrap();
        assert_eq!(run.fields.len(), 5);
        assert_eq!(run.fields[4].t, 1.0);
        assert!((run.fields[2].t - 0.5).abs() < 1e-12);
        // 100 > ACCURACY_RATIO, and a width-0.3 packet reaches the walls at |x| = 1
        assert_eq!(run.warnings.len(), 2, "{:?}", run.warnings);
    }
}
