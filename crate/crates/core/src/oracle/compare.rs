use super::crank_nicolson::crank_nicolson_evolve;
use super::packet::{Field, InitialState, SpatialGrid};
use super::potential::MollifiedPotential;
use crate::error::{Error, Result};
use crate::kernel::SpaceTimePoint;
use crate::measure::SignedMeasure;
use crate::series::{propagate_many, SeriesConfig, Source};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// A field from the series engine together with its truncation data.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesField {
    pub field: Field,
    pub order: usize,
    /// Certified bound on the omitted point-source terms.
    pub tail_bound: f64,
    /// `tail_bound · ‖ψ₀‖₁`: bounds the truncation error at every point.
    pub pointwise_bound: f64,
}

/// `ψ(x,t) = ∫K(x,t|x₀,t₀)ψ₀(x₀)dx₀` on `grid`, by running the series from
/// the exactly smeared free state of a Gaussian `ψ₀`.
pub fn series_evolve(
    psi0: &InitialState,
    v: &SignedMeasure,
    xi: &TestFunction,
    t0: f64,
    t: f64,
    grid: SpatialGrid,
    tol: f64,
    config: &SeriesConfig,
) -> Result<SeriesField> {
    let packet = psi0.packet()?;
    let targets: Vec<SpaceTimePoint> = grid.points().into_iter().map(|x| SpaceTimePoint { x, t }).collect();
    let source = Source::Packet { t0, profile: packet.profile() };
    let run = propagate_many(v, xi, source, &targets, tol, config)?;
    Ok(SeriesField {
        field: Field { grid, t, values: run.values },
        order: run.order,
        tail_bound: run.error_bound,
        pointwise_bound: run.error_bound * packet.l1_norm(),
    })
}

/// Resolutions for [`cross_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossConfig {
    /// Half width of the grid solver's domain. Point interactions radiate
    /// slowly decaying tails, so this should sit well beyond `compare_half_width`
    /// or the walls reflect them back.
    pub half_width: f64,
    /// Half width of the window where the fields are compared.
    pub compare_half_width: f64,
    pub cn_dx: f64,
    pub cn_dt: f64,
    /// Comparison points are every `stride`-th grid-solver point inside the window.
    pub stride: usize,
    pub series_tol: f64,
    pub series: SeriesConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossEntry {
    pub epsilon: f64,
    /// `‖ψ_series − ψ_CN,ε‖₂` on the comparison points.
    pub l2_diff: f64,
    /// Richardson estimate of the grid solver's own error: a third of its
    /// change under halving `dx` and `dt`.
    pub cn_self_err: f64,
    /// `L²` size of the certified truncation bound over the comparison points.
    pub series_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub entries: Vec<CrossEntry>,
    /// Change of the series field when its time nodes are doubled.
    pub series_self_err: f64,
    /// Difference to the grid-solver field extrapolated to `ε → 0`.
    pub extrapolated_l2_diff: f64,
    /// Log–log slope of `l2_diff` against `ε` over the two finest widths.
    pub fitted_slope: f64,
    /// The series field on the comparison window.
    #[serde(skip)]
    pub series: Field,
    /// The grid-solver field extrapolated to `ε → 0` on the same points.
    #[serde(skip)]
    pub extrapolated: Field,
}

/// Compare the series field with Crank–Nicolson runs on atoms mollified at
/// each width in `epsilons` (strictly monotone, at least three), then
/// extrapolate the grid-solver field to `ε → 0` assuming an error
/// `aε + bε²`.
pub fn cross_validate(
    psi0: &InitialState,
    v: &SignedMeasure,
    xi: &TestFunction,
    t0: f64,
    t: f64,
    epsilons: &[f64],
    config: &CrossConfig,
) -> Result<CrossReport> {
    let decreasing = epsilons.windows(2).all(|w| w[1] < w[0]);
    let increasing = epsilons.windows(2).all(|w| w[1] > w[0]);
    if epsilons.len() < 3 || !(decreasing || increasing) || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter(format!("need at least three positive, strictly monotone widths, got {epsilons:?}")));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));

    let grid = SpatialGrid::symmetric(config.half_width, config.cn_dx)?;
    let fine_grid = SpatialGrid::symmetric(config.half_width, 0.5 * grid.dx)?;
    let coarse = SpatialGrid::symmetric(config.compare_half_width, config.stride as f64 * grid.dx)?;
    if config.compare_half_width > config.half_width {
        return Err(Error::InvalidParameter("comparison window exceeds the solver domain".into()));
    }

    let mut doubled = config.series;
    doubled.nodes *= 2;
    let (series, series_fine) = rayon::join(
        || series_evolve(psi0, v, xi, t0, t, coarse, config.series_tol, &config.series),
        || series_evolve(psi0, v, xi, t0, t, coarse, config.series_tol, &doubled),
    );
    let (series, series_fine) = (series?, series_fine?);
    let series_self_err = series.field.l2_distance(&series_fine.field)?;
    let series_tail = series.pointwise_bound * (coarse.dx * coarse.len as f64).sqrt();

    let drive = if xi.is_zero() { None } else { Some(xi.clone()) };
    let runs: Vec<Result<(Field, f64)>> = eps
        .par_iter()
        .map(|&e| {
            let pot = MollifiedPotential::new(v.clone(), e, drive.clone())?;
            let base = crank_nicolson_evolve(psi0, &pot, grid, config.cn_dt, t0, t, 2)?;
            let fine = crank_nicolson_evolve(psi0, &pot, fine_grid, 0.5 * config.cn_dt, t0, t, 2)?;
            let a = base.last().restrict(coarse)?;
            let b = fine.last().restrict(coarse)?;
            Ok((a.clone(), a.l2_distance(&b)? / 3.0))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let entries = eps
        .iter()
        .zip(&runs)
        .map(|(&epsilon, (field, cn_self_err))| {
            Ok(CrossEntry { epsilon, l2_diff: series.field.l2_distance(field)?, cn_self_err: *cn_self_err, series_tail })
        })
        .collect::<Result<Vec<_>>>()?;

    // f(ε) = f₀ + aε + bε²: the first-order response to a symmetric mollifier
    // is O(ε²), while higher orders see the kink of the free Green's function
    // and pick up O(ε). Lagrange weights at ε = 0 over the three finest widths
    // remove both terms.
    let k = runs.len();
    let nodes = [eps[k - 3], eps[k - 2], eps[k - 1]];
    let weights: Vec<f64> = (0..3)
        .map(|i| (0..3).filter(|&j| j != i).map(|j| nodes[j] / (nodes[j] - nodes[i])).product())
        .collect();
    let values: Vec<Complex64> = (0..coarse.len)
        .map(|m| (0..3).map(|i| weights[i] * runs[k - 3 + i].0.values[m]).sum())
        .collect();
    let extrapolated = Field { grid: coarse, t, values };
    let extrapolated_l2_diff = series.field.l2_distance(&extrapolated)?;
    let series = series.field;
    let (e2, e3) = (nodes[1], nodes[2]);
    let (la, lb) = (entries[k - 2].l2_diff, entries[k - 1].l2_diff);
    let fitted_slope = (la / lb).ln() / (e2 / e3).ln();
    Ok(CrossReport { entries, series_self_err, extrapolated_l2_diff, fitted_slope, series, extrapolated })
}
