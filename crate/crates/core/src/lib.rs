//! Green's functions for singular, time-dependent potentials built from the
//! perturbative white-noise Feynman integrand.
//!
//! The crate is organised bottom-up:
//!
//! * [`testfn`], [`measure`], [`kernel`]: domain types (test functions,
//!   measure-valued potentials, complex Gaussian kernels).
//! * [`quadrature`], [`singular`]: Gauss rules and the weakly singular,
//!   oscillatory product-integration moments used by the series engine.
//! * [`freeprop`]: the closed-form driven free propagator and its T-transform.
//! * [`series`]: the Dyson-type expansion, certified bounds and residual checks.
//! * [`transforms`]: S/T-transform catalog and growth-bound checks.
//! * [`oracle`]: Crank–Nicolson ground truth and wave-packet propagation.
//! * [`io`]: the key=value potential / test-function file format and CSV output.

pub mod error;
pub mod freeprop;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod numeric;
pub mod oracle;
pub mod quadrature;
pub mod series;
pub mod singular;
pub mod testfn;
pub mod transforms;

pub use error::{Error, Result};
pub use kernel::{GaussianKernel, SpaceTimePoint};
pub use measure::{validate_measure, Atom, Decay, Holder, Path, SignedMeasure, TimeDensity, ValidationResult};
pub use num_complex::Complex64;
pub use testfn::TestFunction;

/// Version string embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
