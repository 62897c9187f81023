//! Postselected preparation of an optimal probe after the rotation axis is
//! revealed.
//!
//! The joint state `(U ⊗ I)|Ψ⟩` is expanded as `Σ_i c_i U|φ_i⟩ ⊗ |ψ_i⟩`.
//! Measuring the ancilla in a basis built from the `|ψ_i⟩` and keeping only
//! designated outcomes leaves the probe in `U|n₊⟩` or `U|n₋⟩`.
//!
//! Two routes are provided:
//!
//! * [`orthogonal_protocol`] applies when the present `|ψ_i⟩` are
//!   orthonormal. The ancilla is measured in that family and outcomes `1`
//!   and `m` are kept, with success probability `c_1² + c_m²`.
//! * [`nonorthogonal_protocol`] handles the general case. The ancilla is
//!   measured along `|φ⟩ ∝ P_S|ψ_m⟩`, where `S` is the orthogonal complement
//!   of every other present branch; success probability `c_m² |⟨φ|ψ_m⟩|²`.
//!
//! Every report carries both the closed-form probability and the value
//! obtained by projecting the full joint state onto each kept ancilla
//! outcome.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::entangle::{self, AncillaDecomposition, BipartiteState, EntangleError};
use crate::fisher::{self, OptimalBasis};
use crate::linalg::{self, inner, CVector};
use crate::spin::{AxisSpec, RotationGenerator, SpinError, SpinSystem};

/// Gram matrix tolerance for taking the orthogonal route.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// `‖P_S ψ_m‖` below this means no measurement vector exists.
pub const ZERO_PROJECTION_TOL: f64 = 1e-10;
/// Overlap tolerance for offering the two-outcome variant.
pub const COMBINED_TOL: f64 = 1e-10;
/// Kept outcomes with a smaller brute-force probability carry no post state.
const NEGLIGIBLE_PROB: f64 = 1e-24;
/// Tolerance used when matching the special-case parameter values.
pub const SPECIAL_CASE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("ancilla branches are not orthonormal (Gram deviation {0:e}); use the non-orthogonal protocol")]
    NonOrthogonalAncilla(f64),
    #[error("projection of the target branch onto the solution space vanishes (norm {0:e})")]
    ZeroProjection(f64),
    #[error("target branch {0} has zero weight")]
    AbsentBranch(usize),
    #[error("parameters outside the closed-form domain: {0}")]
    OutOfDomain(String),
    #[error("parameters do not match any degenerate special case")]
    NotSpecialCase,
    #[error("with ξ2 = 0 the probe cannot collapse to U|n₋⟩ unless θ ∈ {{0, π}}")]
    Unreachable,
    #[error("state dimension {state} does not match spin dimension {spin}")]
    DimensionMismatch { state: usize, spin: usize },
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Entangle(#[from] EntangleError),
}

/// Which optimal probe state a kept outcome prepares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Target {
    #[default]
    NMinus,
    NPlus,
}

impl Target {
    /// Position of the corresponding vector in the optimal basis.
    pub fn index(self, dim: usize) -> usize {
        match self {
            Target::NPlus => 0,
            Target::NMinus => dim - 1,
        }
    }

    pub fn other(self) -> Target {
        match self {
            Target::NPlus => Target::NMinus,
            Target::NMinus => Target::NPlus,
        }
    }

    pub fn probe(self, basis: &OptimalBasis) -> &CVector {
        match self {
            Target::NPlus => basis.n_plus(),
            Target::NMinus => basis.n_minus(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Target::NPlus => "n+",
            Target::NMinus => "n-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    NPlus,
    NMinus,
    Both,
    None,
}

impl Branch {
    fn from_targets(targets: impl IntoIterator<Item = Target>) -> Self {
        let (mut plus, mut minus) = (false, false);
        for t in targets {
            match t {
                Target::NPlus => plus = true,
                Target::NMinus => minus = true,
            }
        }
        match (plus, minus) {
            (true, true) => Branch::Both,
            (true, false) => Branch::NPlus,
            (false, true) => Branch::NMinus,
            (false, false) => Branch::None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::NPlus => "n+",
            Branch::NMinus => "n-",
            Branch::Both => "both",
            Branch::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolPath {
    Orthogonal,
    NonOrthogonal,
}

/// An orthonormal ancilla measurement basis and the outcomes that are kept.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub basis: Vec<CVector>,
    pub labels: Vec<Option<Target>>,
}

impl MeasurementPlan {
    pub fn kept(&self) -> impl Iterator<Item = (usize, Target)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(k, l)| l.map(|t| (k, t)))
    }
}

/// `|φ⟩` with an orthonormal completion of the ancilla space.
#[derive(Debug, Clone)]
pub struct MeasurementVector {
    pub target: Target,
    pub phi: CVector,
    /// Orthonormal vectors spanning the complement of `|φ⟩`.
    pub completed_basis: Vec<CVector>,
    /// `‖P_S ψ_target‖`.
    pub projection_norm: f64,
}

/// One kept ancilla outcome.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub target: Target,
    /// Index in the measurement plan.
    pub outcome: usize,
    pub p_closed: f64,
    pub p_bruteforce: f64,
    /// Normalized probe state after postselection.
    pub post_state: CVector,
    /// `|⟨U(β) n_target | post_state⟩|²`.
    pub fidelity: f64,
    pub qfi: f64,
}

#[derive(Debug, Clone)]
pub struct CombinedReport {
    pub p_total_closed: f64,
    pub p_total_bruteforce: f64,
    pub outcomes: Vec<BranchOutcome>,
    pub plan: MeasurementPlan,
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub path: ProtocolPath,
    pub branch: Branch,
    pub p_closed: f64,
    pub p_bruteforce: f64,
    pub outcomes: Vec<BranchOutcome>,
    pub plan: MeasurementPlan,
    /// Present on the non-orthogonal route when the other extreme branch is
    /// orthogonal to every other branch and can be kept as well.
    pub combined: Option<CombinedReport>,
    pub cs: Vec<f64>,
    pub gram_deviation: f64,
}

impl ProtocolReport {
    /// Post-measurement probe state of the first kept outcome.
    pub fn post_state(&self) -> Option<&CVector> {
        self.outcomes.first().map(|o| &o.post_state)
    }

    pub fn qfi_achieved(&self) -> Option<f64> {
        self.outcomes.first().map(|o| o.qfi)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.outcomes
            .iter()
            .chain(self.combined.iter().flat_map(|c| c.outcomes.iter()))
            .map(|o| o.fidelity)
            .fold(1.0, f64::min)
    }

    /// The plan with the most kept outcomes that this report offers.
    pub fn widest_plan(&self) -> &MeasurementPlan {
        self.combined.as_ref().map_or(&self.plan, |c| &c.plan)
    }
}

struct Setup {
    basis: OptimalBasis,
    dec: AncillaDecomposition,
}

fn setup(psi: &BipartiteState, gen: &RotationGenerator) -> Result<Setup, ProtocolError> {
    if psi.dim() != gen.dim() {
        return Err(ProtocolError::DimensionMismatch {
            state: psi.dim(),
            spin: gen.dim(),
        });
    }
    let basis = OptimalBasis::new(gen.spectrum(), 0.0);
    let dec = entangle::ancilla_decomposition(psi, &basis)?;
    Ok(Setup { basis, dec })
}

/// Projects `(U ⊗ I)|Ψ⟩` onto every kept outcome of `plan`.
fn evaluate_plan(
    psi: &BipartiteState,
    gen: &RotationGenerator,
    beta: f64,
    basis: &OptimalBasis,
    plan: &MeasurementPlan,
    closed: impl Fn(usize, Target) -> f64,
) -> Vec<BranchOutcome> {
    let evolved = psi.apply_probe(&gen.propagator(beta));
    plan.kept()
        .filter_map(|(k, target)| {
            let amp = BipartiteState::probe_given_ancilla(&evolved, &plan.basis[k]);
            let p_bruteforce = amp.norm_squared();
            if p_bruteforce < NEGLIGIBLE_PROB {
                return None;
            }
            let post_state = amp.unscale(p_bruteforce.sqrt());
            let expected = gen.evolve(beta, target.probe(basis));
            Some(BranchOutcome {
                target,
                outcome: k,
                p_closed: closed(k, target),
                p_bruteforce,
                fidelity: fisher::fidelity(&expected, &post_state),
                qfi: fisher::qfi_pure(&post_state, gen.hamiltonian()),
                post_state,
            })
        })
        .collect()
}

fn total_bruteforce(psi: &BipartiteState, gen: &RotationGenerator, beta: f64, plan: &MeasurementPlan) -> f64 {
    let evolved = psi.apply_probe(&gen.propagator(beta));
    plan.kept()
        .map(|(k, _)| BipartiteState::probe_given_ancilla(&evolved, &plan.basis[k]).norm_squared())
        .sum()
}

/// Measures the ancilla in the (orthonormal) family of present `|ψ_i⟩`,
/// keeping outcomes `1` (→ n₊) and `m` (→ n₋).
pub fn orthogonal_protocol(
    psi: &BipartiteState,
    gen: &RotationGenerator,
    beta: f64,
) -> Result<ProtocolReport, ProtocolError> {
    let Setup { basis, dec } = setup(psi, gen)?;
    let deviation = dec.gram_deviation();
    if deviation > ORTHOGONALITY_TOL {
        return Err(ProtocolError::NonOrthogonalAncilla(deviation));
    }
    let m = dec.dim();
    let mut family = Vec::new();
    let mut labels = Vec::new();
    let mut branch_of_outcome = Vec::new();
    for (i, v) in dec.present() {
        family.push(v.clone());
        branch_of_outcome.push(Some(i));
        labels.push(match i {
            0 => Some(Target::NPlus),
            i if i == m - 1 => Some(Target::NMinus),
            _ => None,
        });
    }
    let full = linalg::complete_orthonormal(&family, m);
    labels.resize(full.len(), None);
    branch_of_outcome.resize(full.len(), None);
    let plan = MeasurementPlan { basis: full, labels };

    let outcomes = evaluate_plan(psi, gen, beta, &basis, &plan, |k, _| {
        branch_of_outcome[k].map_or(0.0, |i| dec.cs[i].powi(2))
    });
    let p_closed = dec.cs[0].powi(2) + dec.cs[m - 1].powi(2);
    Ok(ProtocolReport {
        path: ProtocolPath::Orthogonal,
        branch: Branch::from_targets(outcomes.iter().map(|o| o.target)),
        p_closed,
        p_bruteforce: total_bruteforce(psi, gen, beta, &plan),
        outcomes,
        plan,
        combined: None,
        cs: dec.cs.clone(),
        gram_deviation: deviation,
    })
}

/// Orthonormal basis of the solution space: vectors orthogonal to every
/// present branch other than `target`.
pub fn solution_space(dec: &AncillaDecomposition, target: Target) -> Vec<CVector> {
    let m = dec.dim();
    let t = target.index(m);
    let spanning: Vec<CVector> = dec
        .present()
        .filter(|(i, _)| *i != t)
        .map(|(_, v)| v.clone())
        .collect();
    let span = linalg::orthonormal_span(&spanning);
    let rank = span.len();
    linalg::complete_orthonormal(&span, m).split_off(rank)
}

/// `|φ⟩ = P_S|ψ_m⟩ / ‖P_S|ψ_m⟩‖`, the success-maximizing measurement vector
/// for collapsing onto `U|n₋⟩`.
pub fn measurement_vector(dec: &AncillaDecomposition) -> Result<MeasurementVector, ProtocolError> {
    measurement_vector_for(dec, Target::NMinus)
}

/// [`measurement_vector`] for either target; `NPlus` swaps the roles of the
/// first and last branches.
pub fn measurement_vector_for(
    dec: &AncillaDecomposition,
    target: Target,
) -> Result<MeasurementVector, ProtocolError> {
    let m = dec.dim();
    let t = target.index(m);
    let psi_t = dec.psis[t].as_ref().ok_or(ProtocolError::AbsentBranch(t))?;
    let spanning: Vec<CVector> = dec
        .present()
        .filter(|(i, _)| *i != t)
        .map(|(_, v)| v.clone())
        .collect();
    let projected = linalg::project_complement(&spanning, psi_t)
        .map_err(|e| ProtocolError::Entangle(e.into()))?;
    let projection_norm = projected.norm();
    if projection_norm < ZERO_PROJECTION_TOL {
        return Err(ProtocolError::ZeroProjection(projection_norm));
    }
    let phi = projected.unscale(projection_norm);
    let completed_basis = linalg::complete_orthonormal(std::slice::from_ref(&phi), m).split_off(1);
    Ok(MeasurementVector {
        target,
        phi,
        completed_basis,
        projection_norm,
    })
}

/// Measures the ancilla in `{|φ⟩, |φ⊥⟩…}` and keeps only `|φ⟩`, which
/// leaves the probe in `U|n₋⟩`.
pub fn nonorthogonal_protocol(
    psi: &BipartiteState,
    gen: &RotationGenerator,
    beta: f64,
) -> Result<ProtocolReport, ProtocolError> {
    nonorthogonal_protocol_for(psi, gen, beta, Target::NMinus)
}

pub fn nonorthogonal_protocol_for(
    psi: &BipartiteState,
    gen: &RotationGenerator,
    beta: f64,
    target: Target,
) -> Result<ProtocolReport, ProtocolError> {
    let Setup { basis, dec } = setup(psi, gen)?;
    let m = dec.dim();
    let t = target.index(m);
    let mv = measurement_vector_for(&dec, target)?;
    let psi_t = dec.psis[t].as_ref().expect("checked by measurement_vector_for");
    let p_closed = dec.cs[t].powi(2) * inner(&mv.phi, psi_t).norm_sqr();

    let mut plan_basis = vec![mv.phi.clone()];
    plan_basis.extend(mv.completed_basis.iter().cloned());
    let mut labels = vec![None; m];
    labels[0] = Some(target);
    let plan = MeasurementPlan {
        basis: plan_basis,
        labels,
    };
    let outcomes = evaluate_plan(psi, gen, beta, &basis, &plan, |_, _| p_closed);

    let other = target.other();
    let o = other.index(m);
    let combined = match dec.psis[o].as_ref() {
        Some(psi_o)
            if dec
                .present()
                .filter(|(i, _)| *i != o)
                .all(|(_, v)| inner(psi_o, v).norm() < COMBINED_TOL) =>
        {
            let mut family = vec![mv.phi.clone(), psi_o.clone()];
            family = linalg::complete_orthonormal(&family, m);
            let mut labels = vec![None; family.len()];
            labels[0] = Some(target);
            labels[1] = Some(other);
            let plan = MeasurementPlan {
                basis: family,
                labels,
            };
            let c_o2 = dec.cs[o].powi(2);
            let outcomes = evaluate_plan(psi, gen, beta, &basis, &plan, |_, tgt| {
                if tgt == target {
                    p_closed
                } else {
                    c_o2
                }
            });
            Some(CombinedReport {
                p_total_closed: p_closed + c_o2,
                p_total_bruteforce: total_bruteforce(psi, gen, beta, &plan),
                outcomes,
                plan,
            })
        }
        _ => None,
    };

    Ok(ProtocolReport {
        path: ProtocolPath::NonOrthogonal,
        branch: Branch::from_targets(outcomes.iter().map(|o| o.target)),
        p_closed,
        p_bruteforce: total_bruteforce(psi, gen, beta, &plan),
        outcomes,
        plan,
        combined,
        cs: dec.cs.clone(),
        gram_deviation: dec.gram_deviation(),
    })
}

/// Picks the route from the Gram matrix of the present branches.
pub fn run_protocol(
    psi: &BipartiteState,
    gen: &RotationGenerator,
    beta: f64,
    target: Target,
) -> Result<ProtocolReport, ProtocolError> {
    match orthogonal_protocol(psi, gen, beta) {
        Err(ProtocolError::NonOrthogonalAncilla(_)) => nonorthogonal_protocol_for(psi, gen, beta, target),
        other => other,
    }
}

/// Spin-1 closed forms for the state `Σ ξ_k |k⟩|k⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spin1ClosedForms {
    /// Measurement vector `(α₀, α₁, α₂)` in the computational basis.
    pub phi: [f64; 3],
    /// Its normalizer `N`.
    pub normalizer: f64,
    /// Single-outcome success probability.
    pub p: f64,
    /// Its maximum over `ξ1` at fixed `ξ2`, reached at `ξ1 = ξ3`.
    pub p_max: f64,
    /// Two-outcome total, defined only when `ξ1 = ξ3`.
    pub p_total: Option<f64>,
}

/// `p_max(ξ2², θ) = ξ2²(1-ξ2²) / (2ξ2² cos²θ + (1-ξ2²) sin²θ)`.
pub fn spin1_p_max(xi2_sq: f64, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    xi2_sq * (1.0 - xi2_sq) / (2.0 * xi2_sq * ct * ct + st * st * (1.0 - xi2_sq))
}

/// Two-outcome total for `ξ1 = ξ3`: `p_max + (1 - ξ2²)/2`.
pub fn spin1_p_total(xi2_sq: f64, theta: f64) -> f64 {
    spin1_p_max(xi2_sq, theta) + (1.0 - xi2_sq) / 2.0
}

pub fn spin1_closed_forms(xi: [f64; 3], theta: f64) -> Result<Spin1ClosedForms, ProtocolError> {
    let [x1, x2, x3] = xi;
    let norm = x1 * x1 + x2 * x2 + x3 * x3;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(ProtocolError::OutOfDomain(format!("Σξ² = {norm}")));
    }
    if !(x1 > 0.0 && x2 > 0.0 && x3 > 0.0) {
        return Err(ProtocolError::OutOfDomain(format!(
            "all Schmidt weights must be positive, got {xi:?}"
        )));
    }
    let (st, ct) = theta.sin_cos();
    let (s1, s2, s3) = (x1 * x1, x2 * x2, x3 * x3);
    let normalizer = (0.5 * s2 * (s1 + s3) * ct * ct + s1 * s3 * st * st).sqrt();
    if normalizer < ZERO_PROJECTION_TOL {
        return Err(ProtocolError::OutOfDomain(format!("N = {normalizer:e}")));
    }
    let phi = [
        x2 * x3 * ct * FRAC_1_SQRT_2 / normalizer,
        x1 * x3 * st / normalizer,
        -x1 * x2 * ct * FRAC_1_SQRT_2 / normalizer,
    ];
    let p = s2 / (s2 * (1.0 - s2) / (2.0 * s1 * s3) * ct * ct + st * st);
    let p_total = ((x1 - x3).abs() <= 1e-12).then(|| spin1_p_total(s2, theta));
    Ok(Spin1ClosedForms {
        phi,
        normalizer,
        p,
        p_max: spin1_p_max(s2, theta),
        p_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// `ξ2 = 0`, `θ ∈ {0, π}`.
    PolarNoMiddle,
    /// `θ = π/2`, `ξ1 = 0`.
    EquatorialNoFirst,
    /// `θ = π/2`, `ξ3 = 0`.
    EquatorialNoLast,
}

#[derive(Debug, Clone)]
pub struct SpecialCaseReport {
    pub case: SpecialCase,
    /// `p_closed` holds the special-case formula; brute-force values come
    /// from the general engine.
    pub report: ProtocolReport,
}

/// Spin-1 configurations where the generic measurement-vector normalizer
/// vanishes.
pub fn appendix_special_cases(xi: [f64; 3], theta: f64) -> Result<SpecialCaseReport, ProtocolError> {
    let [x1, x2, x3] = xi;
    let near = |a: f64, b: f64| (a - b).abs() <= SPECIAL_CASE_TOL;
    let polar = near(theta, 0.0) || near(theta, PI);
    let case = if near(x2, 0.0) {
        if !polar {
            return Err(ProtocolError::Unreachable);
        }
        SpecialCase::PolarNoMiddle
    } else if near(theta, FRAC_PI_2) && near(x1, 0.0) {
        SpecialCase::EquatorialNoFirst
    } else if near(theta, FRAC_PI_2) && near(x3, 0.0) {
        SpecialCase::EquatorialNoLast
    } else {
        return Err(ProtocolError::NotSpecialCase);
    };

    let sys = SpinSystem::new(1.0)?;
    let gen = RotationGenerator::new(&sys, AxisSpec::new(theta)?)?;
    let psi = BipartiteState::diagonal(&xi)?;
    let mut report = nonorthogonal_protocol(&psi, &gen, 0.0)?;
    match case {
        SpecialCase::PolarNoMiddle => {
            report.p_closed = 2.0 * x3 * x3 * (1.0 - x3 * x3);
            if let Some(combined) = report.combined.as_mut() {
                if near(x1, x3) {
                    combined.p_total_closed = 1.0;
                }
            }
        }
        SpecialCase::EquatorialNoFirst => report.p_closed = 1.0 - x3 * x3,
        SpecialCase::EquatorialNoLast => report.p_closed = 1.0 - x1 * x1,
    }
    Ok(SpecialCaseReport { case, report })
}

/// Seeded generator for one independent stream.
pub fn shot_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Born-rule sampler for the ancilla measurement of a fixed protocol run.
#[derive(Debug, Clone)]
pub struct ShotSampler {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    labels: Vec<Option<Target>>,
    post_states: Vec<Option<CVector>>,
}

#[derive(Debug, Clone)]
pub struct Shot {
    pub outcome: usize,
    pub kept: bool,
    pub target: Option<Target>,
    pub post_state: Option<CVector>,
}

impl ShotSampler {
    pub fn new(
        psi: &BipartiteState,
        gen: &RotationGenerator,
        beta: f64,
        plan: &MeasurementPlan,
    ) -> Self {
        let evolved = psi.apply_probe(&gen.propagator(beta));
        let mut probabilities = Vec::with_capacity(plan.basis.len());
        let mut post_states = Vec::with_capacity(plan.basis.len());
        for (b, label) in plan.basis.iter().zip(&plan.labels) {
            let amp = BipartiteState::probe_given_ancilla(&evolved, b);
            let p = amp.norm_squared();
            probabilities.push(p);
            post_states.push((label.is_some() && p > NEGLIGIBLE_PROB).then(|| amp.unscale(p.sqrt())));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            probabilities,
            cumulative,
            labels: plan.labels.clone(),
            post_states,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Exact probability of a kept outcome.
    pub fn keep_probability(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| l.is_some())
            .map(|(p, _)| p)
            .sum()
    }

    pub fn label(&self, outcome: usize) -> Option<Target> {
        self.labels[outcome]
    }

    pub fn post_state(&self, outcome: usize) -> Option<&CVector> {
        self.post_states[outcome].as_ref()
    }

    /// Draws an outcome index.
    pub fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u: f64 = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }

    /// Number of kept outcomes among `shots` independent shots, shot `k`
    /// using stream `k`.
    pub fn count_kept(&self, seed: u64, shots: u64) -> u64 {
        (0..shots)
            .into_par_iter()
            .map(|k| u64::from(sample_shot(self, seed, k).kept))
            .sum()
    }
}

/// One Born-rule shot on stream `shot_index` of `seed`.
pub fn sample_shot(sampler: &ShotSampler, seed: u64, shot_index: u64) -> Shot {
    let mut rng = shot_rng(seed, shot_index);
    let outcome = sampler.draw(&mut rng);
    let target = sampler.label(outcome);
    Shot {
        outcome,
        kept: target.is_some(),
        target,
        post_state: sampler.post_state(outcome).cloned(),
    }
}
