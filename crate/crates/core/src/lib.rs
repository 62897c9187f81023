//! Phase estimation with spin-s probes when the rotation axis is only
//! revealed after the probe has been prepared.
//!
//! A probe entangled with an ancilla is rotated by `exp(-iβ S·n)`. Once the
//! axis `n` (in the x-z plane) becomes known, a measurement on the ancilla
//! postselects the probe into a state with the largest possible quantum
//! Fisher information, `4s²`. The crate computes the relevant states,
//! measurement vectors and success probabilities, both in closed form and by
//! direct simulation of the joint state, and estimates `β` by Monte Carlo
//! maximum likelihood.
//!
//! ```
//! use spinmetro::{maximally_entangled, orthogonal_protocol, AxisSpec, RotationGenerator, SpinSystem};
//!
//! let sys = SpinSystem::new(1.0).unwrap();
//! let gen = RotationGenerator::new(&sys, AxisSpec::new(0.7).unwrap()).unwrap();
//! let report = orthogonal_protocol(&maximally_entangled(3).unwrap(), &gen, 0.2).unwrap();
//! assert!((report.p_bruteforce - 2.0 / 3.0).abs() < 1e-10);
//! ```

pub mod entangle;
pub mod estimator;
pub mod figures;
pub mod fisher;
pub mod linalg;
pub mod protocol;
pub mod spin;
pub mod validate;

pub use entangle::{
    ancilla_decomposition, max_prob_state, maximally_entangled, random_state, schmidt, AncillaDecomposition,
    BipartiteState, EntangleError, SchmidtForm,
};
pub use estimator::{
    mle, run_estimation, EstimationConfig, EstimationResult, EstimationSetup, EstimatorError, Likelihood,
    OutcomeModel,
};
pub use figures::{FigureError, Table};
pub use fisher::{cfi, qfi_pure, FisherError, OptimalBasis};
pub use linalg::{CMatrix, CVector, LinalgError, C64};
pub use protocol::{
    appendix_special_cases, measurement_vector, nonorthogonal_protocol, orthogonal_protocol, run_protocol,
    sample_shot, spin1_closed_forms, Branch, ProtocolError, ProtocolPath, ProtocolReport, ShotSampler, Target,
};
pub use spin::{AxisSpec, HamiltonianSpectrum, RotationGenerator, SpinError, SpinSystem};
pub use validate::CheckResult;
