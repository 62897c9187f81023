//! Classical and quantum Fisher information for pure probe states, the
//! optimal probe states `n±`, and Cramér-Rao bound arithmetic.

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::linalg::{c, inner, CMatrix, CVector};
use crate::spin::{HamiltonianSpectrum, RotationGenerator};

/// Probabilities at or below this are treated as zero in the CFI sum.
pub const ZERO_PROB_TOL: f64 = 1e-12;
/// A zero-probability outcome whose derivative exceeds this makes the CFI diverge.
pub const ZERO_DERIV_TOL: f64 = 1e-9;
/// Required accuracy of `Σ P_i = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Step for the central-difference derivative cross-check.
pub const FINITE_DIFF_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FisherError {
    #[error("Fisher information diverges: outcome {index} has P = {probability:e} but dP/dβ = {derivative:e}")]
    DivergentFI {
        index: usize,
        probability: f64,
        derivative: f64,
    },
    #[error("outcome probabilities are not normalized (sum = {sum}, min = {min})")]
    NotNormalized { sum: f64, min: f64 },
}

/// `(|E_1⟩ ± e^{iα}|E_m⟩)/√2`.
pub fn optimal_states(spec: &HamiltonianSpectrum, alpha: f64) -> (CVector, CVector) {
    let phase = c(0.0, alpha).exp();
    let top = spec.top();
    let bottom = spec.bottom() * phase;
    (
        (top + &bottom).scale(FRAC_1_SQRT_2),
        (top - &bottom).scale(FRAC_1_SQRT_2),
    )
}

/// The measurement basis `{n₊, |E_2⟩, …, |E_{m-1}⟩, n₋}`.
#[derive(Debug, Clone)]
pub struct OptimalBasis {
    phis: Vec<CVector>,
}

impl OptimalBasis {
    pub fn new(spec: &HamiltonianSpectrum, alpha: f64) -> Self {
        let m = spec.dim();
        let (n_plus, n_minus) = optimal_states(spec, alpha);
        let mut phis = Vec::with_capacity(m);
        phis.push(n_plus);
        phis.extend(spec.eigenstates[1..m - 1].iter().cloned());
        phis.push(n_minus);
        Self { phis }
    }

    pub fn phis(&self) -> &[CVector] {
        &self.phis
    }

    pub fn dim(&self) -> usize {
        self.phis.len()
    }

    pub fn n_plus(&self) -> &CVector {
        &self.phis[0]
    }

    pub fn n_minus(&self) -> &CVector {
        &self.phis[self.phis.len() - 1]
    }
}

/// `4(⟨H²⟩ - ⟨H⟩²)` for a unit state, clamped at zero.
pub fn qfi_pure(state: &CVector, h: &CMatrix) -> f64 {
    let h_psi = h * state;
    let mean = inner(state, &h_psi).re;
    let second = h_psi.norm_squared();
    (4.0 * (second - mean * mean)).max(0.0)
}

/// `Σ (∂P_i)² / P_i` over `(P_i, ∂P_i)` pairs.
pub fn cfi(outcomes: &[(f64, f64)]) -> Result<f64, FisherError> {
    let sum: f64 = outcomes.iter().map(|o| o.0).sum();
    let min = outcomes.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    if (sum - 1.0).abs() > NORMALIZATION_TOL || min < -ZERO_PROB_TOL || !sum.is_finite() {
        return Err(FisherError::NotNormalized { sum, min });
    }
    let mut total = 0.0;
    for (index, &(p, dp)) in outcomes.iter().enumerate() {
        if p > ZERO_PROB_TOL {
            total += dp * dp / p;
        } else if dp.abs() > ZERO_DERIV_TOL {
            return Err(FisherError::DivergentFI {
                index,
                probability: p,
                derivative: dp,
            });
        }
    }
    Ok(total)
}

/// `P_i(β) = |⟨φ_i| U(β) |probe⟩|²`.
pub fn probe_measurement_probs(
    gen: &RotationGenerator,
    beta: f64,
    probe: &CVector,
    basis: &OptimalBasis,
) -> Vec<f64> {
    let evolved = gen.evolve(beta, probe);
    basis.phis().iter().map(|phi| inner(phi, &evolved).norm_sqr()).collect()
}

/// `(P_i(β), ∂P_i/∂β)` with the derivative taken analytically:
/// `∂P_i = 2 Re(⟨φ_i|ψ_β⟩* ⟨φ_i|-iH|ψ_β⟩)`.
pub fn probe_measurement_probs_with_derivs(
    gen: &RotationGenerator,
    beta: f64,
    probe: &CVector,
    basis: &OptimalBasis,
) -> Vec<(f64, f64)> {
    let evolved = gen.evolve(beta, probe);
    let tangent = (gen.hamiltonian() * &evolved) * c(0.0, -1.0);
    basis
        .phis()
        .iter()
        .map(|phi| {
            let amp = inner(phi, &evolved);
            let damp = inner(phi, &tangent);
            (amp.norm_sqr(), 2.0 * (amp.conj() * damp).re)
        })
        .collect()
}

/// Same as [`probe_measurement_probs_with_derivs`], derivatives by central
/// difference with step `h`.
pub fn probe_measurement_probs_finite_diff(
    gen: &RotationGenerator,
    beta: f64,
    probe: &CVector,
    basis: &OptimalBasis,
    h: f64,
) -> Vec<(f64, f64)> {
    let centre = probe_measurement_probs(gen, beta, probe, basis);
    let up = probe_measurement_probs(gen, beta + h, probe, basis);
    let down = probe_measurement_probs(gen, beta - h, probe, basis);
    centre
        .into_iter()
        .zip(up.into_iter().zip(down))
        .map(|(p, (u, d))| (p, (u - d) / (2.0 * h)))
        .collect()
}

/// `1 / (N F)`.
pub fn cramer_rao_bound(shots: u64, fisher: f64) -> f64 {
    1.0 / (shots as f64 * fisher)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub cfi: f64,
    pub qfi: f64,
    /// `1/(N · cfi)`.
    pub crb: f64,
}

/// CFI of measuring `U(β)|probe⟩` in the optimal basis, alongside the QFI
/// of the probe and the bound for `shots` repetitions.
pub fn fisher_report(
    gen: &RotationGenerator,
    beta: f64,
    probe: &CVector,
    basis: &OptimalBasis,
    shots: u64,
) -> Result<FisherReport, FisherError> {
    let classical = cfi(&probe_measurement_probs_with_derivs(gen, beta, probe, basis))?;
    Ok(FisherReport {
        cfi: classical,
        qfi: qfi_pure(probe, gen.hamiltonian()),
        crb: cramer_rao_bound(shots, classical),
    })
}

/// `|⟨a|b⟩|²` for unit vectors.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    inner(a, b).norm_sqr()
}
