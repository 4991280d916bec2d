use hidaprop::oracle::*;
use hidaprop::series::SeriesConfig;
use hidaprop::*;

fn atom(w: f64) -> SignedMeasure {
    SignedMeasure::single_static(w, 0.0, (0.0, 1.0)).unwrap()
}

fn packet() -> InitialState {
    InitialState::Gaussian(WavePacket::new(-1.0, 1.0, 1.0).unwrap())
}

fn window() -> SpatialGrid {
    SpatialGrid::symmetric(12.0, 0.04).unwrap()
}

fn evolve(v: &SignedMeasure, tol: f64) -> SeriesField {
    series_evolve(&packet(), v, &TestFunction::zero(), 0.0, 1.0, window(), tol, &SeriesConfig::default()).unwrap()
}

#[test]
fn empty_measure_gives_the_free_packet() {
    let xi = TestFunction::bump(0.5, 0.4, 0.8).unwrap();
    let p = WavePacket::new(0.5, -1.0, 0.7).unwrap();
    let v = SignedMeasure::empty((0.0, 1.0)).unwrap();
    let s = series_evolve(&InitialState::Gaussian(p), &v, &xi, 0.0, 0.9, window(), 1e-8, &SeriesConfig::default()).unwrap();
    assert_eq!(s.order, 0);
    assert_eq!(s.tail_bound, 0.0);
    let free = p.free_field(&xi, 0.0, 0.9, window()).unwrap();
    assert!(s.field.l2_distance(&free).unwrap() < 1e-13);
}

#[test]
fn weak_coupling_response_is_linear_in_weight() {
    let free = evolve(&SignedMeasure::empty((0.0, 1.0)).unwrap(), 1e-10).field;
    let response = |w: f64| evolve(&atom(w), 1e-10).field.l2_distance(&free).unwrap() / w;
    let (a, b, c) = (response(0.04), response(0.02), response(0.01));
    // the second-order remainder halves with the weight
    let (d1, d2) = ((a - b).abs(), (b - c).abs());
    assert!(d1 > 1e-6 && (d1 / d2 - 2.0).abs() < 0.1, "{a} {b} {c}");
    assert!(d2 / c < 0.05);
}

#[test]
fn tabulated_states_are_rejected() {
    let grid = window();
    let state = InitialState::Tabulated(Field { grid, t: 0.0, values: packet().sample(grid).unwrap() });
    let err = series_evolve(&state, &atom(0.25), &TestFunction::zero(), 0.0, 1.0, grid, 1e-6, &SeriesConfig::default());
    assert!(matches!(err, Err(Error::Unsupported(_))));
}

#[test]
fn truncated_fields_stay_within_the_certified_bound() {
    let v = atom(0.25);
    let exact = evolve(&v, 1e-12);
    for tol in [1e-2, 1e-3, 1e-5] {
        let s = evolve(&v, tol);
        let worst = s.field.values.iter().zip(&exact.field.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst <= s.pointwise_bound + exact.pointwise_bound, "tol {tol}: {worst:e} > {:e}", s.pointwise_bound);
    }
}

#[test]
fn norm_deviation_is_controlled_by_the_tail() {
    let v = atom(0.25);
    let exact = evolve(&v, 1e-12);
    let reference = exact.field.norm_sq();
    // what is left is the grid quadrature of |ψ|² and the mass outside the window
    assert!((reference - 1.0).abs() < 1e-4, "{reference}");
    let width = (window().len as f64 * window().dx).sqrt();
    for tol in [1e-2, 1e-3, 1e-4] {
        let s = evolve(&v, tol);
        let l2_tail = (s.pointwise_bound + exact.pointwise_bound) * width;
        let bound = l2_tail * (2.0 * reference.sqrt() + l2_tail);
        let dev = (s.field.norm_sq() - reference).abs();
        assert!(dev <= bound, "tol {tol}: {dev:e} > {bound:e}");
    }
}

fn cross_config(half_width: f64, compare: f64, dx: f64, stride: usize) -> CrossConfig {
    CrossConfig {
        half_width,
        compare_half_width: compare,
        cn_dx: dx,
        cn_dt: 0.1 * dx,
        stride,
        series_tol: 1e-10,
        series: SeriesConfig::default(),
    }
}

#[test]
fn width_sequences_must_be_monotone() {
    let cfg = cross_config(12.0, 4.0, 0.02, 4);
    let run = |eps: &[f64]| cross_validate(&packet(), &atom(0.25), &TestFunction::zero(), 0.0, 1.0, eps, &cfg);
    for eps in [&[0.1, 0.05, 0.1][..], &[0.1, 0.05], &[0.1, 0.1, 0.05], &[0.1, 0.05, 0.0]] {
        assert!(matches!(run(eps), Err(Error::InvalidParameter(_))), "{eps:?}");
    }
}

#[test]
fn comparison_window_must_fit_the_domain() {
    let cfg = cross_config(4.0, 6.0, 0.02, 4);
    let err = cross_validate(&packet(), &atom(0.25), &TestFunction::zero(), 0.0, 1.0, &[0.2, 0.1, 0.05], &cfg);
    assert!(err.is_err());
}

#[test]
fn free_case_difference_is_the_grid_solver_error() {
    let p = WavePacket::new(0.0, 0.0, 2.0).unwrap();
    let v = SignedMeasure::empty((0.0, 1.0)).unwrap();
    let half = p.suggested_half_width(&TestFunction::zero(), 0.0, 1.0);
    let cfg = CrossConfig { cn_dt: 1e-4, ..cross_config(half.ceil(), 12.0, 0.01, 4) };
    let r = cross_validate(&InitialState::Gaussian(p), &v, &TestFunction::zero(), 0.0, 1.0, &[0.2, 0.1, 0.05], &cfg).unwrap();
    for e in &r.entries {
        assert!(e.l2_diff < 1e-6, "{e:?}");
        assert_eq!(e.series_tail, 0.0);
    }
    assert!(r.extrapolated_l2_diff < 1e-6);
    assert_eq!(r.series_self_err, 0.0);
}

#[test]
fn weak_coupling_agrees_with_mollified_grid_solver() {
    // cheaper than the acceptance run: coarser grid, narrower domain
    let cfg = cross_config(24.0, 8.0, 0.01, 4);
    let r = cross_validate(&packet(), &atom(0.25), &TestFunction::zero(), 0.0, 1.0, &[0.2, 0.1, 0.05], &cfg).unwrap();
    let diffs: Vec<f64> = r.entries.iter().map(|e| e.l2_diff).collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    assert!(r.extrapolated_l2_diff < 5e-3, "{r:?}");
    assert!(r.extrapolated_l2_diff < diffs[2], "{r:?}");
    assert!(r.entries.iter().all(|e| e.cn_self_err < 1e-3));
    assert!(r.series_self_err < 1e-3);
    assert!(r.fitted_slope > 0.5, "{}", r.fitted_slope);
}
