//! Benchmark fixtures shared by the criterion targets.

pub use hidaprop;

use hidaprop::oracle::{InitialState, MollifiedPotential, WavePacket};
use hidaprop::{SignedMeasure, SpaceTimePoint, TestFunction};

/// One static atom of weight ½ at the origin, active on [0, 1].
pub fn single_atom() -> SignedMeasure {
    SignedMeasure::single_static(0.5, 0.0, (0.0, 1.0)).expect("valid atom")
}

/// `n` targets spread over [−0.4, 0.4] at t = 1.
pub fn line(n: usize) -> Vec<SpaceTimePoint> {
    (0..n).map(|j| SpaceTimePoint { x: -0.4 + 0.8 * j as f64 / (n - 1).max(1) as f64, t: 1.0 }).collect()
}

pub fn drive() -> TestFunction {
    TestFunction::bump(0.5, 0.3, 1.0).expect("valid bump")
}

pub fn packet() -> InitialState {
    InitialState::Gaussian(WavePacket::new(-1.0, 1.0, 1.0).expect("valid packet"))
}

/// The atom of weight ¼ smeared to width `epsilon`.
pub fn mollified(epsilon: f64) -> MollifiedPotential {
    let v = SignedMeasure::single_static(0.25, 0.0, (0.0, 1.0)).expect("valid atom");
    MollifiedPotential::new(v, epsilon, None).expect("valid mollifier")
}
