//! Subcommand drivers. Each returns the exit code or a [`Failure`].

use crate::args::*;
use crate::config::RunConfig;
use crate::failure::{exit, Failure};
use crate::suites::Suite;
use hidaprop::io::{parse_potential, parse_test_function, parse_test_function_spec, write_csv_preamble, Report};
use hidaprop::oracle::{
    crank_nicolson_evolve, cross_validate, series_evolve, CrossConfig, Field, InitialState, MollifiedPotential, SpatialGrid,
    WavePacket,
};
use hidaprop::series::{propagate_many, write_csv as write_terms_csv, SeriesConfig, Source};
use hidaprop::transforms::{check_order_two_bound, TransformKind, UFunctional};
use hidaprop::{Complex64, SignedMeasure, SpaceTimePoint, TestFunction};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

pub type Outcome = Result<u8, Failure>;

pub fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::invalid("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::failed(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Propagate(a) => propagate(&a),
        Command::Evolve(a) => evolve(&a),
        Command::Transform(a) => transform(&a),
        Command::Verify(a) => verify(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::invalid(what()))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn text(path: &Path, bytes: &[u8]) -> Result<String, Failure> {
    String::from_utf8(bytes.to_vec()).map_err(|_| Failure::invalid(format!("{}: not UTF-8", path.display())))
}

/// Write `bytes` to `path`, or stdout when there is none.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::failed(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn potential(path: Option<&Path>, config: RunConfig) -> Result<(SignedMeasure, RunConfig), Failure> {
    match path {
        None => Ok((SignedMeasure::empty((0.0, 1.0))?, config)),
        Some(p) => {
            let bytes = read(p)?;
            let v = parse_potential(&text(p, &bytes)?).map_err(|e| Failure::from(e).context(p.display()))?;
            Ok((v, config.with_input("potential", &bytes)))
        }
    }
}

fn drive(args: &DriveArgs, config: RunConfig) -> Result<(TestFunction, RunConfig), Failure> {
    match &args.xi_file {
        None => Ok((parse_test_function_spec(&args.xi).map_err(|e| Failure::from(e).context("--xi"))?, config)),
        Some(p) => {
            let bytes = read(p)?;
            let xi = parse_test_function(&text(p, &bytes)?).map_err(|e| Failure::from(e).context(p.display()))?;
            Ok((xi, config.with_input("xi", &bytes)))
        }
    }
}

fn series_config(args: &SeriesArgs, horizon: Option<f64>) -> Result<SeriesConfig, Failure> {
    check((4..=4096).contains(&args.nodes), || format!("--nodes must lie in 4..=4096, got {}", args.nodes))?;
    check(args.max_order <= 200, || format!("--max-order must be at most 200, got {}", args.max_order))?;
    Ok(SeriesConfig { nodes: args.nodes, max_order: args.max_order, horizon })
}

fn tolerance(tol: f64) -> Result<f64, Failure> {
    check(tol > 0.0 && tol < 1.0, || format!("--tol must lie in (0, 1), got {tol}"))?;
    Ok(tol)
}

fn csv<F>(hash: &str, body: F) -> Result<Vec<u8>, Failure>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write_csv_preamble(&mut buf, hash)?;
    body(&mut buf)?;
    Ok(buf)
}

fn line_targets(spec: &str, at: f64) -> Result<Vec<SpaceTimePoint>, Failure> {
    let bad = || Failure::invalid(format!("--line expects a:b:n with n >= 2, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(2..=1_000_000).contains(&n) || !a.is_finite() || !b.is_finite() || !at.is_finite() {
        return Err(bad());
    }
    Ok((0..n).map(|j| SpaceTimePoint { x: a + (b - a) * j as f64 / (n - 1) as f64, t: at }).collect())
}

pub fn propagate(args: &PropagateArgs) -> Outcome {
    let config = RunConfig::new("propagate", args);
    let (v, config) = potential(args.series.potential.as_deref(), config)?;
    let (xi, config) = drive(&args.drive, config)?;
    let tol = tolerance(args.tol)?;
    let mut targets: Vec<SpaceTimePoint> = args.target.iter().map(|&(x, t)| SpaceTimePoint { x, t }).collect();
    if let Some(spec) = &args.line {
        targets.extend(line_targets(spec, args.at.expect("clap requires --at"))?);
    }
    check(!targets.is_empty(), || "give at least one --target or a --line".into())?;
    let source = SpaceTimePoint { x: args.source.0, t: args.source.1 };
    if let Some(p) = targets.iter().find(|p| p.t <= source.t) {
        return Err(Failure::invalid(format!("target time {} must exceed the source time {}", p.t, source.t)));
    }
    let run = propagate_many(&v, &xi, Source::Point(source), &targets, tol, &series_config(&args.series, None)?)?;

    let hash = config.hash();
    let table = csv(&hash, |out| {
        writeln!(out, "x,t,re,im,error_bound,order")?;
        for (p, k) in run.targets.iter().zip(&run.values) {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}", p.x, p.t, k.re, k.im, run.error_bound, run.order)?;
        }
        Ok(())
    })?;
    if let Some(path) = &args.terms {
        emit(Some(path), &csv(&hash, |out| write_terms_csv(out, &run, source.t))?)?;
    }
    emit(args.out.as_deref(), &table)?;
    if !run.bounds_hold() {
        return Err(Failure::failed("a term exceeded its certified bound on the collocation grid"));
    }
    Ok(exit::OK)
}

fn initial_state(spec: &str, grid: SpatialGrid, config: RunConfig) -> Result<(InitialState, RunConfig), Failure> {
    let bad = || Failure::invalid(format!("--psi0 expects gaussian:center,momentum,width or table:PATH, got {spec:?}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "gaussian" => {
            let p: Vec<f64> = rest.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
            let [c, k, w] = p[..] else { return Err(bad()) };
            Ok((InitialState::Gaussian(WavePacket::new(c, k, w)?), config))
        }
        "table" => {
            let path = Path::new(rest);
            let bytes = read(path)?;
            let field = read_table(&text(path, &bytes)?, grid).map_err(|f| f.context(path.display()))?;
            Ok((InitialState::Tabulated(field), config.with_input("psi0", &bytes)))
        }
        _ => Err(bad()),
    }
}

/// Rows `x,re,im` (a header and `#` lines are skipped) covering `grid` exactly.
fn read_table(text: &str, grid: SpatialGrid) -> Result<Field, Failure> {
    let mut values = Vec::with_capacity(grid.len);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let bad = |msg: &str| Failure::invalid(format!("line {}: {msg}", i + 1));
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("expected finite numbers"))?;
        let [x, re, im] = cols[..] else { return Err(bad("expected x,re,im")) };
        let j = values.len();
        if j >= grid.len || (x - grid.x(j)).abs() > 1e-9 * grid.x_max().max(1.0) {
            return Err(bad(&format!("x = {x} is off the solver grid (expected point {j} of {})", grid.len)));
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.len {
        return Err(Failure::invalid(format!("table has {} rows, the solver grid {}", values.len(), grid.len)));
    }
    Ok(Field { grid, t: 0.0, values })
}

#[derive(Serialize)]
struct SeriesSummary {
    order: usize,
    tail_bound: f64,
    pointwise_bound: f64,
}

#[derive(Serialize)]
struct CnSummary {
    epsilon: f64,
    steps: usize,
    dt: f64,
    norm_drift: f64,
    edge_mass: f64,
    warnings: Vec<String>,
}

pub fn evolve(args: &EvolveArgs) -> Outcome {
    check(args.t > args.t0, || format!("--t must exceed --t0, got {} and {}", args.t, args.t0))?;
    check(args.dx > 0.0 && args.dx <= 1.0, || format!("--dx must lie in (0, 1], got {}", args.dx))?;
    check(args.dt > 0.0 && args.dt <= 1.0, || format!("--dt must lie in (0, 1], got {}", args.dt))?;
    check((1..=1000).contains(&args.stride), || format!("--stride must lie in 1..=1000, got {}", args.stride))?;
    check(args.compare_half_width > 0.0 && args.compare_half_width <= args.half_width, || {
        format!("need 0 < --compare-half-width <= --half-width, got {} and {}", args.compare_half_width, args.half_width)
    })?;
    check(args.half_width / args.dx <= 1e7, || "grid-solver domain exceeds 2e7 points".into())?;
    check(args.epsilon.iter().all(|e| *e > 0.0 && e.is_finite()), || format!("--epsilon widths must be positive, got {:?}", args.epsilon))?;
    let tol = tolerance(args.tol)?;

    let config = RunConfig::new("evolve", args);
    let (v, config) = potential(args.series.potential.as_deref(), config)?;
    let (xi, config) = drive(&args.drive, config)?;
    let grid = SpatialGrid::symmetric(args.half_width, args.dx)?;
    let window = SpatialGrid::symmetric(args.compare_half_width, args.stride as f64 * grid.dx)?;
    let (psi0, config) = initial_state(&args.psi0, grid, config)?;
    let series_cfg = series_config(&args.series, None)?;
    if args.method != Method::Cn {
        psi0.packet()?;
    }
    let hash = config.hash();
    fs::create_dir_all(&args.out_dir)?;
    let out = |name: &str| args.out_dir.join(name);
    let field_csv = |f: &Field| csv(&hash, |o| f.write_csv(o));

    match args.method {
        Method::Series => {
            let s = series_evolve(&psi0, &v, &xi, args.t0, args.t, window, tol, &series_cfg)?;
            emit(Some(&out("series.csv")), &field_csv(&s.field)?)?;
            let summary = SeriesSummary { order: s.order, tail_bound: s.tail_bound, pointwise_bound: s.pointwise_bound };
            emit(Some(&out("series.json")), Report::new("evolve.series", &hash, &config, summary).to_json().as_bytes())?;
        }
        Method::Cn => {
            let eps = args.epsilon.iter().copied().fold(f64::INFINITY, f64::min);
            let pot = MollifiedPotential::new(v, eps, (!xi.is_zero()).then_some(xi))?;
            let run = crank_nicolson_evolve(&psi0, &pot, grid, args.dt, args.t0, args.t, 2)?;
            emit(Some(&out("cn.csv")), &field_csv(&run.last().restrict(window)?)?)?;
            let summary = CnSummary {
                epsilon: eps,
                steps: run.steps,
                dt: run.dt,
                norm_drift: run.norm_drift,
                edge_mass: run.edge_mass,
                warnings: run.warnings,
            };
            emit(Some(&out("cn.json")), Report::new("evolve.cn", &hash, &config, summary).to_json().as_bytes())?;
        }
        Method::Both => {
            let cross = CrossConfig {
                half_width: args.half_width,
                compare_half_width: args.compare_half_width,
                cn_dx: args.dx,
                cn_dt: args.dt,
                stride: args.stride,
                series_tol: tol,
                series: series_cfg,
            };
            let r = cross_validate(&psi0, &v, &xi, args.t0, args.t, &args.epsilon, &cross)?;
            emit(Some(&out("series.csv")), &field_csv(&r.series)?)?;
            emit(Some(&out("cn_extrapolated.csv")), &field_csv(&r.extrapolated)?)?;
            emit(Some(&out("compare.json")), Report::new("evolve.compare", &hash, &config, &r).to_json().as_bytes())?;
        }
    }
    Ok(exit::OK)
}

fn functional(args: &TransformArgs) -> Result<UFunctional, Failure> {
    let pt = |(x, t): (f64, f64)| SpaceTimePoint { x, t };
    let f = match args.functional {
        FunctionalName::Donsker => UFunctional::donsker(args.a, args.t)?,
        FunctionalName::Normexp => UFunctional::normexp(Complex64::new(args.c.0, args.c.1), args.interval)?,
        FunctionalName::I0delta => UFunctional::i0delta(pt(args.target), pt(args.source))?,
        FunctionalName::Cubic => UFunctional::cubic_exp(args.interval)?,
    };
    Ok(f)
}

pub fn transform(args: &TransformArgs) -> Outcome {
    let config = RunConfig::new("transform", args);
    let (xi, config) = drive(&args.drive, config)?;
    let f = functional(args)?;
    let kind = match args.kind {
        Kind::S => TransformKind::S,
        Kind::T => TransformKind::T,
    };
    let hash = config.hash();
    if let Some(zmax) = args.growth {
        check(zmax > 0.0 && zmax <= 100.0, || format!("--growth radius must lie in (0, 100], got {zmax}"))?;
        check(!xi.is_zero(), || "the growth bound needs a nonzero --xi as its ray".into())?;
        let report = check_order_two_bound(&f, std::slice::from_ref(&xi), zmax, 0)?;
        let passed = report.passed;
        emit(args.out.as_deref(), Report::new("transform.growth", &hash, &config, report).to_json().as_bytes())?;
        return Ok(if passed { exit::OK } else { exit::FAILED });
    }
    let rows: Vec<(Complex64, Complex64)> = args
        .z
        .iter()
        .map(|&(re, im)| {
            let z = Complex64::new(re, im);
            (z, f.eval(kind, &xi, z))
        })
        .collect();
    if let Some((z, _)) = rows.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Failure::failed(format!("transform is not finite at z = {z}")));
    }
    let table = csv(&hash, |out| {
        writeln!(out, "z_re,z_im,re,im")?;
        for (z, v) in &rows {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", z.re, z.im, v.re, v.im)?;
        }
        Ok(())
    })?;
    emit(args.out.as_deref(), &table)?;
    Ok(exit::OK)
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let config = RunConfig::new("verify", args);
    let hash = config.hash();
    let report = args.suite.run(args.seed)?;
    for c in &report.checks {
        eprintln!("{} {}: {:e} (limit {:e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.measured, c.limit);
    }
    let passed = report.passed;
    emit(args.out.as_deref(), Report::new("verify", &hash, &config, report).to_json().as_bytes())?;
    Ok(if passed { exit::OK } else { exit::FAILED })
}

#[derive(Serialize)]
struct Timing {
    workload: Workload,
    threads: usize,
    seconds: Vec<f64>,
    min: f64,
    median: f64,
}

fn workload(w: Workload) -> Result<(), Failure> {
    match w {
        Workload::Propagate => {
            let v = SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0))?;
            let targets: Vec<_> = (0..9).map(|j| SpaceTimePoint { x: -0.4 + 0.1 * j as f64, t: 1.0 }).collect();
            let source = Source::Point(SpaceTimePoint { x: 0.25, t: 0.0 });
            propagate_many(&v, &TestFunction::zero(), source, &targets, 1e-8, &SeriesConfig::default())?;
        }
        Workload::Cn => {
            let v = SignedMeasure::single_static(0.25, 0.0, (0.0, 1.0))?;
            let psi0 = InitialState::Gaussian(WavePacket::new(-1.0, 1.0, 1.0)?);
            let pot = MollifiedPotential::new(v, 0.1, None)?;
            crank_nicolson_evolve(&psi0, &pot, SpatialGrid::symmetric(12.0, 0.01)?, 1e-3, 0.0, 1.0, 2)?;
        }
        Workload::Transform => {
            Suite::Transforms.run(0)?;
        }
    }
    Ok(())
}

pub fn bench(args: &BenchArgs) -> Outcome {
    check((1..=1000).contains(&args.repeat), || format!("--repeat must lie in 1..=1000, got {}", args.repeat))?;
    let config = RunConfig::new("bench", args);
    let hash = config.hash();
    let mut seconds = Vec::with_capacity(args.repeat);
    for _ in 0..args.repeat {
        let start = Instant::now();
        workload(args.workload)?;
        seconds.push(start.elapsed().as_secs_f64());
    }
    let mut sorted = seconds.clone();
    sorted.sort_by(f64::total_cmp);
    let timing = Timing {
        workload: args.workload,
        threads: rayon::current_num_threads(),
        min: sorted[0],
        median: sorted[sorted.len() / 2],
        seconds,
    };
    emit(args.out.as_deref(), Report::new("bench", &hash, &config, timing).to_json().as_bytes())?;
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_targets_are_evenly_spaced() {
        let t = line_targets("-1:1:5", 0.5).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!((t[0].x, t[2].x, t[4].x, t[3].t), (-1.0, 0.0, 1.0, 0.5));
        for bad in ["1:2", "a:1:3", "0:1:1", "0:1:x"] {
            assert_eq!(line_targets(bad, 1.0).unwrap_err().code, exit::INVALID, "{bad}");
        }
    }

    #[test]
    fn tables_must_cover_the_grid() {
        let grid = SpatialGrid::symmetric(0.02, 0.01).unwrap();
        let rows: String = (0..grid.len).map(|j| format!("{},{},0\n", grid.x(j), j)).collect();
        let f = read_table(&format!("# c\nx,re,im\n{rows}"), grid).unwrap();
        assert_eq!(f.values[2], Complex64::new(2.0, 0.0));
        assert!(read_table("0,1,0\n", grid).is_err());
        assert!(read_table(&rows.replace("0.01,", "0.5,"), grid).is_err());
    }
}
