//! Fixtures shared by the benchmarks.

use spinmetro::entangle::maximally_entangled;
use spinmetro::{AxisSpec, EstimationConfig, EstimationSetup, RotationGenerator, SpinSystem, Target};

pub fn generator(s: f64, theta: f64) -> RotationGenerator {
    RotationGenerator::new(&SpinSystem::new(s).expect("valid spin"), AxisSpec::new(theta).expect("valid axis"))
        .expect("non-degenerate")
}

/// Spin-1, maximally entangled, axis at 0.9 rad.
pub fn maximal_setup() -> EstimationSetup {
    EstimationSetup {
        state: maximally_entangled(3).expect("m >= 2"),
        generator: generator(1.0, 0.9),
        target: Target::NMinus,
        two_outcome: false,
    }
}

pub fn single_trial(shots: u64, seed: u64) -> EstimationConfig {
    EstimationConfig {
        beta_true: 0.4,
        shots,
        trials: 2,
        seed,
    }
}
