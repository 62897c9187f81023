//! Monte Carlo maximum-likelihood estimation of the rotation angle.
//!
//! Each trial repeats the postselected protocol until `shots` runs have
//! been kept, measures every kept probe in the optimal basis and maximizes
//! the multinomial log-likelihood over the fundamental domain
//! `(0, π/(2s))`. The spread of the estimates across trials is compared with
//! the Cramér-Rao bound `1/(N·4s²)`.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::entangle::BipartiteState;
use crate::fisher::OptimalBasis;
use crate::linalg::{inner, C64, CVector};
use crate::protocol::{self, MeasurementPlan, ProtocolError, ShotSampler, Target};
use crate::spin::{HamiltonianSpectrum, RotationGenerator};

pub const GRID_POINTS: usize = 1024;
pub const GOLDEN_TOL: f64 = 1e-9;
pub const FLAT_TOL: f64 = 1e-12;
/// Fraction of the fundamental domain excluded at each end.
pub const DOMAIN_MARGIN: f64 = 0.05;
/// Protocols whose keep probability is below this are rejected.
pub const MIN_KEEP_PROBABILITY: f64 = 1e-9;
/// Model probabilities below this are round-off and count as zero.
pub const MODEL_ZERO_TOL: f64 = 1e-28;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("log-likelihood is flat across the grid (variation {0:e})")]
    FlatLikelihood(f64),
    #[error("beta = {beta} lies outside ({lo}, {hi})")]
    BetaOutOfDomain { beta: f64, lo: f64, hi: f64 },
    #[error("shots and trials must be positive (shots = {shots}, trials = {trials})")]
    EmptyRun { shots: u64, trials: u64 },
    #[error("trials must be at least 2 to estimate a variance")]
    TooFewTrials,
    #[error("keep probability {0:e} is too small to sample")]
    NoKeptOutcomes(f64),
    #[error("counts length {got} does not match {expected} outcomes")]
    CountsMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Outcome probabilities `P_i(β) = |⟨φ_i| U(β) |probe⟩|²` in a fixed basis,
/// stored as `Σ_k A_ik e^{-iβE_k}` so that evaluation is cheap.
#[derive(Debug, Clone)]
pub struct OutcomeModel {
    energies: Vec<f64>,
    amps: Vec<Vec<C64>>,
}

impl OutcomeModel {
    pub fn new(spec: &HamiltonianSpectrum, probe: &CVector, basis: &[CVector]) -> Self {
        let weights: Vec<C64> = spec.eigenstates.iter().map(|e| inner(e, probe)).collect();
        let amps = basis
            .iter()
            .map(|phi| {
                spec.eigenstates
                    .iter()
                    .zip(&weights)
                    .map(|(e, w)| inner(phi, e) * w)
                    .collect()
            })
            .collect();
        Self {
            energies: spec.energies.clone(),
            amps,
        }
    }

    pub fn outcomes(&self) -> usize {
        self.amps.len()
    }

    pub fn probs(&self, beta: f64) -> Vec<f64> {
        let phases: Vec<C64> = self
            .energies
            .iter()
            .map(|e| C64::from_polar(1.0, -beta * e))
            .collect();
        self.amps
            .iter()
            .map(|row| row.iter().zip(&phases).map(|(a, p)| a * p).sum::<C64>().norm_sqr())
            .collect()
    }

    /// `Σ_i counts_i log P_i(β)`; zero counts contribute nothing, a positive
    /// count on a zero-probability outcome gives `-∞`.
    pub fn log_likelihood(&self, counts: &[f64], beta: f64) -> f64 {
        self.probs(beta)
            .iter()
            .zip(counts)
            .filter(|(_, &n)| n > 0.0)
            .map(|(&p, n)| if p < MODEL_ZERO_TOL { f64::NEG_INFINITY } else { n * p.ln() })
            .sum()
    }
}

/// Log-likelihood of several independent multinomial blocks, one per kept
/// ancilla outcome.
#[derive(Debug, Clone, Default)]
pub struct Likelihood {
    terms: Vec<(OutcomeModel, Vec<f64>)>,
}

impl Likelihood {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(model: OutcomeModel, counts: Vec<f64>) -> Result<Self, EstimatorError> {
        let mut l = Self::new();
        l.push(model, counts)?;
        Ok(l)
    }

    pub fn push(&mut self, model: OutcomeModel, counts: Vec<f64>) -> Result<(), EstimatorError> {
        if counts.len() != model.outcomes() {
            return Err(EstimatorError::CountsMismatch {
                expected: model.outcomes(),
                got: counts.len(),
            });
        }
        self.terms.push((model, counts));
        Ok(())
    }

    pub fn eval(&self, beta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(model, counts)| model.log_likelihood(counts, beta))
            .sum()
    }
}

/// Convenience wrapper: log-likelihood of `counts` for `probe` measured in
/// `basis` after rotation by `beta`.
pub fn likelihood(
    counts: &[f64],
    gen: &RotationGenerator,
    probe: &CVector,
    basis: &[CVector],
    beta: f64,
) -> f64 {
    OutcomeModel::new(gen.spectrum(), probe, basis).log_likelihood(counts, beta)
}

/// Global maximizer over `[lo, hi]`: a uniform grid scan followed by
/// golden-section refinement around the best grid point.
pub fn mle(likelihood: &Likelihood, lo: f64, hi: f64) -> Result<f64, EstimatorError> {
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|j| likelihood.eval(lo + step * j as f64)).collect();
    let (best, best_val) = grid
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    let finite_min = grid
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let variation = if best_val.is_finite() { best_val - finite_min } else { 0.0 };
    let has_infinite = grid.iter().any(|v| !v.is_finite());
    if !best_val.is_finite() || (variation < FLAT_TOL && !has_infinite) {
        return Err(EstimatorError::FlatLikelihood(variation));
    }

    let mut a = lo + step * best.saturating_sub(1) as f64;
    let mut b = (lo + step * (best + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = likelihood.eval(x1);
    let mut f2 = likelihood.eval(x2);
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = likelihood.eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = likelihood.eval(x1);
        }
    }
    let refined = 0.5 * (a + b);
    let candidates = [(refined, likelihood.eval(refined)), (a, likelihood.eval(a)), (b, likelihood.eval(b))];
    let (arg, val) = candidates
        .into_iter()
        .fold((refined, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(if val >= best_val { arg } else { lo + step * best as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConfig {
    pub beta_true: f64,
    /// Kept shots per trial.
    pub shots: u64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimationConfig {
    /// Identifiable range `(δ, π/(2s) − δ)` for spin `s`.
    pub fn beta_range(s: f64) -> (f64, f64) {
        let width = std::f64::consts::PI / (2.0 * s);
        (DOMAIN_MARGIN * width, width - DOMAIN_MARGIN * width)
    }

    pub fn validate(&self, s: f64) -> Result<(), EstimatorError> {
        let (lo, hi) = Self::beta_range(s);
        if !(self.beta_true > lo && self.beta_true < hi) {
            return Err(EstimatorError::BetaOutOfDomain {
                beta: self.beta_true,
                lo,
                hi,
            });
        }
        if self.shots == 0 || self.trials == 0 {
            return Err(EstimatorError::EmptyRun {
                shots: self.shots,
                trials: self.trials,
            });
        }
        if self.trials < 2 {
            return Err(EstimatorError::TooFewTrials);
        }
        Ok(())
    }
}

/// The entangled resource and how its ancilla is measured.
#[derive(Debug, Clone)]
pub struct EstimationSetup {
    pub state: BipartiteState,
    pub generator: RotationGenerator,
    pub target: Target,
    /// Keep both extreme outcomes when the non-orthogonal route offers it.
    pub two_outcome: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub beta_hat: f64,
    pub kept: u64,
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub trials: Vec<TrialResult>,
    pub mean: f64,
    /// Unbiased sample variance of the estimates.
    pub empirical_variance: f64,
    /// Per-kept-shot Fisher information of the optimal probe, `4s²`.
    pub fisher: f64,
    /// `1/(N·F)` with `N` kept shots per trial.
    pub crb: f64,
    pub kept_fraction: f64,
    /// Exact keep probability of the protocol.
    pub keep_probability: f64,
    pub beta_true: f64,
    pub shots: u64,
}

impl EstimationResult {
    /// `N·F·var(β̂)`; approaches 1 when the bound is saturated.
    pub fn normalized_variance(&self) -> f64 {
        self.empirical_variance / self.crb
    }

    pub fn bias(&self) -> f64 {
        self.mean - self.beta_true
    }

    pub fn beta_hats(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.beta_hat).collect()
    }

    pub fn total_attempts(&self) -> u64 {
        self.trials.iter().map(|t| t.attempts).sum()
    }
}

struct KeptBranch {
    outcome: usize,
    model: OutcomeModel,
    cumulative: Vec<f64>,
}

fn plan_for(setup: &EstimationSetup, beta: f64) -> Result<MeasurementPlan, EstimatorError> {
    let report = protocol::run_protocol(&setup.state, &setup.generator, beta, setup.target)?;
    Ok(if setup.two_outcome {
        report.widest_plan().clone()
    } else {
        report.plan
    })
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(cumulative: &[f64], rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

pub fn run_estimation(cfg: &EstimationConfig, setup: &EstimationSetup) -> Result<EstimationResult, EstimatorError> {
    let gen = &setup.generator;
    let s = gen.system().s();
    cfg.validate(s)?;
    let plan = plan_for(setup, cfg.beta_true)?;
    let sampler = ShotSampler::new(&setup.state, gen, cfg.beta_true, &plan);
    let keep_probability = sampler.keep_probability();
    if keep_probability < MIN_KEEP_PROBABILITY {
        return Err(EstimatorError::NoKeptOutcomes(keep_probability));
    }

    let basis = OptimalBasis::new(gen.spectrum(), 0.0);
    let phis = basis.phis().to_vec();
    let branches: Vec<KeptBranch> = plan
        .kept()
        .filter_map(|(k, target)| {
            let post = sampler.post_state(k)?;
            let probs: Vec<f64> = phis.iter().map(|phi| inner(phi, post).norm_sqr()).collect();
            Some(KeptBranch {
                outcome: k,
                model: OutcomeModel::new(gen.spectrum(), target.probe(&basis), &phis),
                cumulative: cumulative(&probs),
            })
        })
        .collect();
    let ancilla_cumulative = cumulative(sampler.probabilities());
    let branch_of: Vec<Option<usize>> = (0..plan.basis.len())
        .map(|k| branches.iter().position(|b| b.outcome == k))
        .collect();
    let hi = gen.system().fundamental_domain();

    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = protocol::shot_rng(cfg.seed, trial);
            let mut counts = vec![vec![0.0; phis.len()]; branches.len()];
            let (mut kept, mut attempts) = (0u64, 0u64);
            while kept < cfg.shots {
                attempts += 1;
                let outcome = draw(&ancilla_cumulative, &mut rng);
                if let Some(b) = branch_of[outcome] {
                    let i = draw(&branches[b].cumulative, &mut rng);
                    counts[b][i] += 1.0;
                    kept += 1;
                }
            }
            let mut l = Likelihood::new();
            for (branch, c) in branches.iter().zip(counts) {
                l.push(branch.model.clone(), c)?;
            }
            Ok(TrialResult {
                beta_hat: mle(&l, 0.0, hi)?,
                kept,
                attempts,
            })
        })
        .collect::<Result<_, EstimatorError>>()?;

    let n = trials.len() as f64;
    let mean = trials.iter().map(|t| t.beta_hat).sum::<f64>() / n;
    let empirical_variance = trials.iter().map(|t| (t.beta_hat - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let fisher = gen.system().max_qfi();
    let kept_total: u64 = trials.iter().map(|t| t.kept).sum();
    let attempts_total: u64 = trials.iter().map(|t| t.attempts).sum();
    Ok(EstimationResult {
        mean,
        empirical_variance,
        fisher,
        crb: 1.0 / (cfg.shots as f64 * fisher),
        kept_fraction: kept_total as f64 / attempts_total as f64,
        keep_probability,
        beta_true: cfg.beta_true,
        shots: cfg.shots,
        trials,
    })
}
