use crate::error::{Error, Result};
use crate::freeprop;
use crate::kernel::GaussianKernel;
use crate::testfn::TestFunction;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

/// Uniform points `x_min + j·dx`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub dx: f64,
    pub len: usize,
}

impl SpatialGrid {
    /// Points on `[−half_width, half_width]` with spacing as close to `dx` as
    /// divides the interval evenly.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(dx > 0.0) || dx > half_width {
            return Err(Error::InvalidParameter(format!("bad grid: half width {half_width}, dx {dx}")));
        }
        let cells = (2.0 * half_width / dx).round() as usize;
        Ok(Self { x_min: -half_width, dx: 2.0 * half_width / cells as f64, len: cells + 1 })
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.x(j)).collect()
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len - 1)
    }

    /// Every `stride`-th point, starting from the first.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !(self.len - 1).is_multiple_of(stride) {
            return Err(Error::InvalidParameter(format!("stride {stride} does not divide {} cells", self.len - 1)));
        }
        Ok(Self { x_min: self.x_min, dx: self.dx * stride as f64, len: (self.len - 1) / stride + 1 })
    }
}

/// Complex values on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: SpatialGrid,
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    /// Discrete L² distance; both fields must share the grid.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("fields live on different grids".into()));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid.dx).sqrt())
    }

    pub fn subsample(&self, stride: usize) -> Result<Field> {
        let grid = self.grid.subsample(stride)?;
        Ok(Field { grid, t: self.t, values: self.values.iter().step_by(stride).copied().collect() })
    }

    /// The values on `target`, whose points must all be points of this grid.
    pub fn restrict(&self, target: SpatialGrid) -> Result<Field> {
        let offset = (target.x_min - self.grid.x_min) / self.grid.dx;
        let stride = target.dx / self.grid.dx;
        let (j0, step) = (offset.round(), stride.round());
        let aligned = (offset - j0).abs() < 1e-6 && (stride - step).abs() < 1e-6 && j0 >= 0.0 && step >= 1.0;
        let (j0, step) = (j0 as usize, step as usize);
        if !aligned || j0 + (target.len - 1) * step >= self.grid.len {
            return Err(Error::InvalidParameter("target grid is not a sub-grid of the field's grid".into()));
        }
        Ok(Field { grid: target, t: self.t, values: (0..target.len).map(|j| self.values[j0 + j * step]).collect() })
    }

    /// `|ψ|²` mass within `width` of either end.
    pub fn edge_mass(&self, width: f64) -> f64 {
        let (lo, hi) = (self.grid.x_min + width, self.grid.x_max() - width);
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let x = self.grid.x(*j);
                x < lo || x > hi
            })
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * self.grid.dx
    }

    /// Rows `x,re,im` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid.x(j), v.re, v.im)?;
        }
        Ok(())
    }
}

/// `ψ₀(x) = (πσ²)^{−1/4} exp(−(x − x_c)²/(2σ²) + ik₀x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl WavePacket {
    pub fn new(center: f64, momentum: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() || !momentum.is_finite() {
            return Err(Error::InvalidParameter(format!("packet needs width > 0, got {width}")));
        }
        Ok(Self { center, momentum, width })
    }

    /// The packet as a kernel in `x` alone.
    pub fn profile(&self) -> GaussianKernel {
        let s2 = self.width * self.width;
        GaussianKernel::profile(
            Complex64::new((PI * s2).powf(-0.25), 0.0),
            Complex64::new(0.0, 0.5 / s2),
            Complex64::new(self.momentum, -self.center / s2),
            Complex64::new(0.0, 0.5 * self.center * self.center / s2),
        )
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.profile().eval(x, 0.0)
    }

    /// `∫|ψ₀|`.
    pub fn l1_norm(&self) -> f64 {
        (PI * self.width * self.width).powf(-0.25) * self.width * (2.0 * PI).sqrt()
    }

    /// The packet evolved without atoms under the drive `ξ̇(t)x`.
    pub fn free_evolved(&self, xi: &TestFunction, t0: f64, t: f64) -> Result<GaussianKernel> {
        if t == t0 {
            return Ok(self.profile());
        }
        freeprop::kernel(xi, t0, t).compose(&self.profile())
    }

    pub fn free_field(&self, xi: &TestFunction, t0: f64, t: f64, grid: SpatialGrid) -> Result<Field> {
        let k = self.free_evolved(xi, t0, t)?;
        Ok(Field { grid, t, values: grid.points().into_iter().map(|x| k.eval(x, 0.0)).collect() })
    }

    /// Half width of a domain holding all but `e^{−2·16}`-relative mass of the
    /// free packet over `[t0, t]`, allowing for drift and spreading.
    pub fn suggested_half_width(&self, xi: &TestFunction, t0: f64, t: f64) -> f64 {
        let span = t - t0;
        let spread = (self.width.powi(2) + (span / self.width).powi(2)).sqrt();
        let drift = xi.sup_norm(t0, t) * span + xi.integral(t0, t).abs();
        self.center.abs() + self.momentum.abs() * span + drift + 8.0 * spread
    }
}

/// Initial data for an evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Gaussian(WavePacket),
    /// Arbitrary samples; only the grid solver accepts these.
    Tabulated(Field),
}

impl InitialState {
    pub fn sample(&self, grid: SpatialGrid) -> Result<Vec<Complex64>> {
        match self {
            Self::Gaussian(p) => Ok(grid.points().into_iter().map(|x| p.eval(x)).collect()),
            Self::Tabulated(f) if f.grid == grid => Ok(f.values.clone()),
            Self::Tabulated(_) => Err(Error::InvalidParameter("tabulated state lives on another grid".into())),
        }
    }

    pub fn packet(&self) -> Result<WavePacket> {
        match self {
            Self::Gaussian(p) => Ok(*p),
            Self::Tabulated(_) => Err(Error::Unsupported("series evolution needs a Gaussian initial state".into())),
        }
    }
}
