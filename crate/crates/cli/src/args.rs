//! Command-line grammar.

use crate::suites::Suite;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  a computation failed or a verification did not pass
  2  malformed input, out-of-range parameter or inadmissible potential
  3  the requested tolerance needs more orders than --max-order allows";

#[derive(Debug, Parser)]
#[command(name = "hidaprop", version, about = "Green's functions for singular time-dependent potentials", after_help = EXIT_CODES)]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "HIDAPROP_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sum the propagator series K(x,t|x0,t0) at target points.
    Propagate(PropagateArgs),
    /// Evolve an initial state by the series, the grid solver, or both.
    Evolve(EvolveArgs),
    /// Evaluate an S- or T-transform of a catalog functional.
    Transform(TransformArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Time a fixed workload.
    Bench(BenchArgs),
}

/// The time-dependent drive ξ.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DriveArgs {
    /// zero | bump:c,h,a | linear:s,k,a,b,r | spline:k1 k2 ..;v1 v2 ..
    #[arg(long, default_value = "zero", conflicts_with = "xi_file")]
    pub xi: String,
    /// Test-function file with a [testfunction] section.
    #[arg(long)]
    #[serde(skip)]
    pub xi_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesArgs {
    /// Potential file; without one the potential vanishes on [0, 1].
    #[arg(long)]
    #[serde(skip)]
    pub potential: Option<PathBuf>,
    /// Collocation steps in sqrt(t - t0), 4..=4096.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Highest series order, 0..=200.
    #[arg(long, default_value_t = 60)]
    pub max_order: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Source point x0,t0.
    #[arg(long, default_value = "0,0", value_parser = parse_pair, allow_hyphen_values = true)]
    pub source: (f64, f64),
    /// Target point x,t (repeatable).
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub target: Vec<(f64, f64)>,
    /// Evenly spaced targets a:b:n, all at time --at.
    #[arg(long, requires = "at", allow_hyphen_values = true)]
    pub line: Option<String>,
    /// Time of the --line targets.
    #[arg(long)]
    pub at: Option<f64>,
    /// Certified error bound to reach, in (0, 1).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Also write every term K_n with M_n and the tail bound.
    #[arg(long)]
    #[serde(skip)]
    pub terms: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Cn,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// gaussian:center,momentum,width or table:PATH (rows x,re,im on the solver grid).
    #[arg(long, allow_hyphen_values = true)]
    pub psi0: String,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Start time.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    /// End time.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Half width of the grid solver's domain.
    #[arg(long, default_value_t = 36.0)]
    pub half_width: f64,
    /// Half width of the window where fields are written and compared.
    #[arg(long, default_value_t = 12.0)]
    pub compare_half_width: f64,
    /// Grid-solver spacing.
    #[arg(long, default_value_t = 0.005)]
    pub dx: f64,
    /// Grid-solver time step.
    #[arg(long, default_value_t = 5e-4)]
    pub dt: f64,
    /// Output points are every stride-th grid-solver point.
    #[arg(long, default_value_t = 8)]
    pub stride: usize,
    /// Mollifier widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub epsilon: Vec<f64>,
    /// Certified series tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Directory for the output files.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalName {
    Donsker,
    Normexp,
    I0delta,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    S,
    T,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub functional: FunctionalName,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Points z on the ray z·ξ, as re,im (repeatable).
    #[arg(long, value_parser = parse_pair, default_value = "1,0", allow_hyphen_values = true)]
    pub z: Vec<(f64, f64)>,
    #[arg(long, value_enum, default_value_t = Kind::S)]
    pub kind: Kind,
    /// Donsker: level a.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Donsker: time t.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// normexp: coefficient c as re,im.
    #[arg(long, value_parser = parse_pair, default_value = "-0.5,0", allow_hyphen_values = true)]
    pub c: (f64, f64),
    /// normexp, cubic: time interval a,b.
    #[arg(long, value_parser = parse_pair, default_value = "0,1", allow_hyphen_values = true)]
    pub interval: (f64, f64),
    /// i0delta: target x,t.
    #[arg(long, value_parser = parse_pair, default_value = "0,1", allow_hyphen_values = true)]
    pub target: (f64, f64),
    /// i0delta: source x0,t0.
    #[arg(long, value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
    pub source: (f64, f64),
    /// Instead of values, fit the order-two growth bound along ξ over |z| <= this radius.
    #[arg(long)]
    pub growth: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Seed of the randomized sweeps.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Workload {
    /// Nine targets behind a single atom at tolerance 1e-8.
    Propagate,
    /// One grid-solver run on a 24-wide domain.
    Cn,
    /// The transforms suite.
    Transform,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(value_enum, default_value_t = Workload::Propagate)]
    pub workload: Workload,
    /// Timed repetitions, 1..=1000.
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// `"a,b"` as two finite numbers.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let num = |v: &str| {
        v.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("not a finite number: {v:?}"))
    };
    Ok((num(a)?, num(b)?))
}
