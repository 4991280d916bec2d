//! Input files, CSV preambles and JSON report envelopes.
//!
//! # Input format
//!
//! Line oriented. `#` starts a comment, blank lines are skipped, `[name]`
//! opens a section and every other line is `key = value`. Lists are
//! whitespace-separated numbers. Keys may appear once per section; unknown
//! keys and sections are errors. All errors carry the offending line number.
//!
//! A potential file:
//!
//! ```text
//! window = 0 1            # time window, default 0 1
//! decay_radius = 1        # declared Gaussian decay radius R, default 1
//! decay_beta = 1          # declared decay rate β, default 1
//!
//! [atom]                  # one section per atom
//! weight = 0.5
//! x = 0.0                 # position, or offset of a moving atom
//! path_knots = 0 0.5 1    # optional: clamped spline added to x
//! path_values = 0 0.2 0
//!
//! [time_density]          # optional; default f = 1 on the window
//! breaks = 0 0.5 1        # n + 1 increasing breakpoints
//! values = 1 0.5          # n values, f = values[i] on [breaks[i], breaks[i+1])
//! ```
//!
//! A test function lives in a `[testfunction]` section, either in its own
//! file or next to a potential:
//!
//! ```text
//! [testfunction]
//! kind = bump             # zero | bump | linear | spline | hermite
//! center = 0.5            # bump: center, half_width, amplitude
//! half_width = 0.4
//! amplitude = 1.0
//! ```
//!
//! `linear` takes `start`, `slope`, `window` (two numbers) and `ramp`;
//! `spline` takes `knots` and `values`; `hermite` adds `slopes`.
//! The same functions have a one-line form for command lines, see
//! [`parse_test_function_spec`].

use crate::error::{Error, Result};
use crate::measure::{Atom, Decay, Path, SignedMeasure, TimeDensity};
use crate::testfn::TestFunction;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

/// Bumped whenever a report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out = vec![Section { name: String::new(), line: 0, entries: BTreeMap::new() }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, format!("unterminated section header `{content}`")))?
                .trim();
            if !matches!(name, "atom" | "time_density" | "testfunction") {
                return Err(parse_error(line, format!("unknown section `[{name}]`")));
            }
            out.push(Section { name: name.to_string(), line, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| parse_error(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(parse_error(line, "empty key"));
        }
        let section = out.last_mut().expect("top-level section");
        if section.entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

impl Section {
    fn describe(&self) -> String {
        if self.name.is_empty() {
            "top level".into()
        } else {
            format!("[{}] at line {}", self.name, self.line)
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, (line, _))) => Err(parse_error(*line, format!("unknown key `{k}` in {}", self.describe()))),
            None => Ok(()),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<(usize, Vec<f64>)>> {
        let Some((line, raw)) = self.entries.get(key) else { return Ok(None) };
        let values = raw
            .split_whitespace()
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_error(*line, format!("`{key}`: `{tok}` is not a finite number"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(parse_error(*line, format!("`{key}` has no value")));
        }
        Ok(Some((*line, values)))
    }

    fn list(&self, key: &str) -> Result<(usize, Vec<f64>)> {
        self.numbers(key)?.ok_or_else(|| parse_error(self.line, format!("{} is missing `{key}`", self.describe())))
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        let (line, v) = self.list(key)?;
        match v[..] {
            [x] => Ok(x),
            _ => Err(parse_error(line, format!("`{key}` takes one number, got {}", v.len()))),
        }
    }

    fn optional_scalar(&self, key: &str, default: f64) -> Result<f64> {
        if self.entries.contains_key(key) {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }

    fn pair(&self, key: &str) -> Result<Option<(usize, (f64, f64))>> {
        match self.numbers(key)? {
            None => Ok(None),
            Some((line, v)) if v.len() == 2 => Ok(Some((line, (v[0], v[1])))),
            Some((line, v)) => Err(parse_error(line, format!("`{key}` takes two numbers, got {}", v.len()))),
        }
    }

    fn text(&self, key: &str) -> Result<(usize, &str)> {
        self.entries
            .get(key)
            .map(|(line, v)| (*line, v.as_str()))
            .ok_or_else(|| parse_error(self.line, format!("{} is missing `{key}`", self.describe())))
    }
}

/// Attach a line number to a construction error.
fn at(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => parse_error(line, other.to_string()),
    }
}

/// Read a potential. `[testfunction]` sections are skipped.
pub fn parse_potential(text: &str) -> Result<SignedMeasure> {
    let secs = sections(text)?;
    let top = &secs[0];
    top.check_keys(&["window", "decay_radius", "decay_beta"])?;
    let window = top.pair("window")?.map(|(_, w)| w).unwrap_or((0.0, 1.0));
    let window_line = top.entries.get("window").map(|(l, _)| *l).unwrap_or(1);
    let decay = Decay { radius: top.optional_scalar("decay_radius", 1.0)?, beta: top.optional_scalar("decay_beta", 1.0)? };

    let mut atoms = Vec::new();
    let mut density = None;
    for sec in &secs[1..] {
        match sec.name.as_str() {
            "atom" => {
                sec.check_keys(&["weight", "x", "path_knots", "path_values"])?;
                let weight = sec.scalar("weight")?;
                let x = sec.scalar("x")?;
                let path = match (sec.numbers("path_knots")?, sec.numbers("path_values")?) {
                    (None, None) => Path::fixed(x),
                    (Some((line, knots)), Some((_, values))) => {
                        Path::moving(x, TestFunction::clamped_spline(&knots, &values).map_err(|e| at(line, e))?)
                    }
                    _ => return Err(parse_error(sec.line, "`path_knots` and `path_values` come together")),
                };
                atoms.push(Atom { weight, path });
            }
            "time_density" => {
                if density.is_some() {
                    return Err(parse_error(sec.line, "second [time_density] section"));
                }
                sec.check_keys(&["breaks", "values"])?;
                let (line, breaks) = sec.list("breaks")?;
                let (_, values) = sec.list("values")?;
                density = Some(TimeDensity::new(breaks, values).map_err(|e| at(line, e))?);
            }
            _ => {}
        }
    }
    let line = secs.iter().skip(1).find(|s| s.name != "testfunction").map(|s| s.line).unwrap_or(window_line);
    let density = match density {
        Some(d) => d,
        None => TimeDensity::constant(if atoms.is_empty() { 0.0 } else { 1.0 }, window).map_err(|e| at(window_line, e))?,
    };
    SignedMeasure::new(atoms, density, window, decay).map_err(|e| at(line, e))
}

/// Read the `[testfunction]` section of a file.
pub fn parse_test_function(text: &str) -> Result<TestFunction> {
    let secs = sections(text)?;
    let mut found = secs.iter().filter(|s| s.name == "testfunction");
    let sec = found.next().ok_or_else(|| parse_error(1, "no [testfunction] section"))?;
    if let Some(extra) = found.next() {
        return Err(parse_error(extra.line, "second [testfunction] section"));
    }
    let (kind_line, kind) = sec.text("kind")?;
    let build = || -> Result<TestFunction> {
        match kind {
            "zero" => {
                sec.check_keys(&["kind"])?;
                Ok(TestFunction::zero())
            }
            "bump" => {
                sec.check_keys(&["kind", "center", "half_width", "amplitude"])?;
                TestFunction::bump(sec.scalar("center")?, sec.scalar("half_width")?, sec.scalar("amplitude")?)
            }
            "linear" => {
                sec.check_keys(&["kind", "start", "slope", "window", "ramp"])?;
                let window = sec.pair("window")?.ok_or_else(|| parse_error(sec.line, "linear test function needs `window`"))?.1;
                TestFunction::linear_window(sec.scalar("start")?, sec.scalar("slope")?, window, sec.scalar("ramp")?)
            }
            "spline" => {
                sec.check_keys(&["kind", "knots", "values"])?;
                TestFunction::clamped_spline(&sec.list("knots")?.1, &sec.list("values")?.1)
            }
            "hermite" => {
                sec.check_keys(&["kind", "knots", "values", "slopes"])?;
                TestFunction::from_hermite(&sec.list("knots")?.1, &sec.list("values")?.1, &sec.list("slopes")?.1)
            }
            other => Err(parse_error(kind_line, format!("unknown test function kind `{other}`"))),
        }
    };
    build().map_err(|e| at(sec.line, e))
}

/// One-line test functions: `zero`, `bump:center,half_width,amplitude`,
/// `linear:start,slope,a,b,ramp`, `spline:k0,…,km;v0,…,vm`.
pub fn parse_test_function_spec(spec: &str) -> Result<TestFunction> {
    let bad = |msg: String| Error::InvalidTestFunction(format!("`{spec}`: {msg}"));
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("`{t}` is not a finite number"))))
            .collect()
    };
    match kind.trim() {
        "zero" if args.is_empty() => Ok(TestFunction::zero()),
        "bump" => match nums(args)?[..] {
            [c, h, a] => TestFunction::bump(c, h, a),
            _ => Err(bad("bump takes center,half_width,amplitude".into())),
        },
        "linear" => match nums(args)?[..] {
            [s, k, a, b, r] => TestFunction::linear_window(s, k, (a, b), r),
            _ => Err(bad("linear takes start,slope,a,b,ramp".into())),
        },
        "spline" => {
            let (k, v) = args.split_once(';').ok_or_else(|| bad("spline takes knots;values".into()))?;
            TestFunction::clamped_spline(&nums(k)?, &nums(v)?)
        }
        _ => Err(bad("expected zero, bump:…, linear:… or spline:…".into())),
    }
}

/// Comment lines naming the tool version and configuration hash, written
/// before a CSV header.
pub fn write_csv_preamble<W: Write>(mut out: W, config_hash: &str) -> std::io::Result<()> {
    writeln!(out, "# hidaprop {}", crate::VERSION)?;
    writeln!(out, "# config {config_hash}")
}

/// A JSON report with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, C: Serialize, B: Serialize> {
    /// `hidaprop.<kind>.v<SCHEMA_VERSION>`.
    pub schema: String,
    pub version: &'static str,
    pub config_hash: &'a str,
    pub config: &'a C,
    pub body: B,
}

impl<'a, C: Serialize, B: Serialize> Report<'a, C, B> {
    pub fn new(kind: &str, config_hash: &'a str, config: &'a C, body: B) -> Self {
        Self { schema: format!("hidaprop.{kind}.v{SCHEMA_VERSION}"), version: crate::VERSION, config_hash, config, body }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}
