//! Ground truth for the series engine: a Crank–Nicolson solver for the
//! Schrödinger equation with mollified atoms, Gaussian wave packets pushed
//! through the series by exact smearing, and the comparison between the two.

mod compare;
mod crank_nicolson;
mod packet;
mod potential;

pub use compare::{cross_validate, series_evolve, CrossConfig, CrossEntry, CrossReport, SeriesField};
pub use crank_nicolson::{crank_nicolson_evolve, CnRun, ACCURACY_RATIO};
pub use packet::{Field, InitialState, SpatialGrid, WavePacket};
pub use potential::MollifiedPotential;
