//! Probe-ancilla pure states, their Schmidt form, and the expansion of a
//! joint state over the probe's optimal basis:
//! `|Ψ⟩ = Σ_i c_i |φ_i⟩_A ⊗ |ψ_i⟩_B`.
//!
//! A joint state is stored as its coefficient matrix `χ`, with the probe
//! index on rows and the ancilla index on columns:
//! `|Ψ⟩ = Σ_ij χ_ij |i⟩_A ⊗ |j⟩_B`.

use rand::Rng;
use thiserror::Error;

use crate::fisher::OptimalBasis;
use crate::linalg::{self, cr, inner, CMatrix, CVector, LinalgError};
use crate::spin::HamiltonianSpectrum;

/// Required accuracy of `Σ|χ_ij|² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Branch weights `c_i` at or below this mark `|ψ_i⟩` as absent.
pub const PRESENCE_TOL: f64 = 1e-12;
/// Schmidt coefficients above this count toward the Schmidt rank.
pub const SCHMIDT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntangleError {
    #[error("coefficient matrix must be square and non-empty, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("joint state is not normalized: Σ|χ|² = {0}")]
    NotNormalized(f64),
    #[error("need at least a two-level system, got dimension {0}")]
    DimensionTooSmall(usize),
    #[error("Schmidt weights must be positive with ξ1² + ξ2² = 1, got ({0}, {1})")]
    BadCoefficients(f64, f64),
    #[error("basis dimension {basis} does not match state dimension {state}")]
    DimensionMismatch { basis: usize, state: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    chi: CMatrix,
}

impl BipartiteState {
    pub fn from_coefficients(chi: CMatrix) -> Result<Self, EntangleError> {
        if chi.nrows() == 0 || chi.nrows() != chi.ncols() {
            return Err(EntangleError::BadShape {
                rows: chi.nrows(),
                cols: chi.ncols(),
            });
        }
        if !linalg::is_finite_matrix(&chi) {
            return Err(LinalgError::NonFinite.into());
        }
        let norm = chi.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(EntangleError::NotNormalized(norm));
        }
        Ok(Self { chi })
    }

    /// `Σ_k ξ_k |k⟩|k⟩` for the given Schmidt weights.
    pub fn diagonal(xis: &[f64]) -> Result<Self, EntangleError> {
        Self::from_coefficients(CMatrix::from_diagonal(&linalg::real_vector(xis)))
    }

    pub fn chi(&self) -> &CMatrix {
        &self.chi
    }

    pub fn dim(&self) -> usize {
        self.chi.nrows()
    }

    /// Coefficients of `(U ⊗ I)|Ψ⟩`.
    pub fn apply_probe(&self, u: &CMatrix) -> CMatrix {
        u * &self.chi
    }

    /// Unnormalized probe state left after projecting the ancilla of the
    /// joint state `chi` onto `|b⟩`: `(I ⊗ ⟨b|)|Ψ⟩ = χ b*`.
    pub fn probe_given_ancilla(chi: &CMatrix, b: &CVector) -> CVector {
        chi * b.conjugate()
    }

    /// Unnormalized ancilla state `(⟨a| ⊗ I)|Ψ⟩ = χᵀ a*`.
    pub fn ancilla_given_probe(&self, a: &CVector) -> CVector {
        self.chi.transpose() * a.conjugate()
    }
}

/// `|Ψ⟩ = Σ_k ξ_k |u_k⟩_A ⊗ |v_k⟩_B`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Descending, nonnegative.
    pub xis: Vec<f64>,
    pub us: Vec<CVector>,
    /// Ancilla kets `|v_k⟩`, so that `χ = Σ ξ_k u_k v_kᵀ`.
    pub vs: Vec<CVector>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.xis.iter().filter(|&&x| x > SCHMIDT_RANK_TOL).count()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let m = self.us.first().map_or(0, |u| u.len());
        let mut chi = CMatrix::zeros(m, m);
        for ((xi, u), v) in self.xis.iter().zip(&self.us).zip(&self.vs) {
            chi += (u * v.transpose()).scale(*xi);
        }
        chi
    }
}

/// Schmidt decomposition via the SVD of `χ`. With `χ = Σ σ u w†` the ancilla
/// kets are `v = w*`.
pub fn schmidt(psi: &BipartiteState) -> Result<SchmidtForm, EntangleError> {
    let d = linalg::svd(psi.chi())?;
    Ok(SchmidtForm {
        xis: d.singular_values,
        us: d.left,
        vs: d.right.iter().map(|w| w.conjugate()).collect(),
    })
}

/// Expansion of the joint state over the probe's optimal basis.
#[derive(Debug, Clone)]
pub struct AncillaDecomposition {
    /// `c_i = ‖ψ̃_i‖`.
    pub cs: Vec<f64>,
    /// Unnormalized `|ψ̃_i⟩ = (⟨φ_i| ⊗ I)|Ψ⟩`.
    pub tildes: Vec<CVector>,
    /// `|ψ_i⟩ = ψ̃_i / c_i`, absent when `c_i ≤ PRESENCE_TOL`.
    pub psis: Vec<Option<CVector>>,
    /// `⟨ψ_i|ψ_j⟩` on present indices, zero elsewhere.
    pub gram: CMatrix,
}

impl AncillaDecomposition {
    pub fn dim(&self) -> usize {
        self.cs.len()
    }

    pub fn is_present(&self, i: usize) -> bool {
        self.psis[i].is_some()
    }

    pub fn present(&self) -> impl Iterator<Item = (usize, &CVector)> {
        self.psis
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|v| (i, v)))
    }

    /// Largest deviation of the Gram matrix from the identity, restricted to
    /// present indices.
    pub fn gram_deviation(&self) -> f64 {
        let present: Vec<usize> = self.present().map(|(i, _)| i).collect();
        let mut worst = 0.0_f64;
        for &i in &present {
            for &j in &present {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.gram[(i, j)] - cr(target)).norm());
            }
        }
        worst
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.gram_deviation() <= tol
    }

    /// `Σ c_i²`.
    pub fn total_weight(&self) -> f64 {
        self.cs.iter().map(|c| c * c).sum()
    }

    /// Rebuilds `χ` from `Σ_i c_i |φ_i⟩ ⊗ |ψ_i⟩`.
    pub fn reconstruct(&self, basis: &OptimalBasis) -> CMatrix {
        let m = self.dim();
        let mut chi = CMatrix::zeros(m, m);
        for (phi, tilde) in basis.phis().iter().zip(&self.tildes) {
            chi += phi * tilde.transpose();
        }
        chi
    }
}

pub fn ancilla_decomposition(
    psi: &BipartiteState,
    basis: &OptimalBasis,
) -> Result<AncillaDecomposition, EntangleError> {
    let m = psi.dim();
    if basis.dim() != m {
        return Err(EntangleError::DimensionMismatch {
            basis: basis.dim(),
            state: m,
        });
    }
    let tildes: Vec<CVector> = basis
        .phis()
        .iter()
        .map(|phi| psi.ancilla_given_probe(phi))
        .collect();
    let cs: Vec<f64> = tildes.iter().map(|t| t.norm()).collect();
    let psis: Vec<Option<CVector>> = tildes
        .iter()
        .zip(&cs)
        .map(|(t, &c)| (c > PRESENCE_TOL).then(|| t.unscale(c)))
        .collect();
    let mut gram = CMatrix::zeros(m, m);
    for (i, a) in psis.iter().enumerate() {
        for (j, b) in psis.iter().enumerate() {
            if let (Some(a), Some(b)) = (a, b) {
                gram[(i, j)] = inner(a, b);
            }
        }
    }
    Ok(AncillaDecomposition {
        cs,
        tildes,
        psis,
        gram,
    })
}

/// `Σ_k |k⟩|k⟩ / √m`.
pub fn maximally_entangled(m: usize) -> Result<BipartiteState, EntangleError> {
    if m < 2 {
        return Err(EntangleError::DimensionTooSmall(m));
    }
    BipartiteState::from_coefficients(CMatrix::identity(m, m).unscale((m as f64).sqrt()))
}

/// Random normalized vector with entries drawn uniformly from the unit
/// square of the complex plane.
pub fn random_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v.unscale(n)
}

/// Random joint state of two `m`-level systems, drawn as in [`random_vector`].
pub fn random_state(m: usize, rng: &mut impl Rng) -> BipartiteState {
    let v = random_vector(m * m, rng);
    let chi = CMatrix::from_fn(m, m, |i, j| v[i * m + j]);
    BipartiteState::from_coefficients(chi).expect("normalized by construction")
}

/// `ξ1 |n₊⟩|n₋⟩ - ξ2 |n₋⟩|n₊⟩`, i.e. `χ_ij = ξ1 M_1i M_2j - ξ2 M_2i M_1j`
/// with the rows of `M` holding `n±` in the computational basis. For the
/// axis it was built from, this state postselects with certainty.
pub fn max_prob_state(
    spec: &HamiltonianSpectrum,
    xi1: f64,
    xi2: f64,
) -> Result<BipartiteState, EntangleError> {
    let valid = xi1 > 0.0 && xi2 > 0.0 && (xi1 * xi1 + xi2 * xi2 - 1.0).abs() <= 1e-12;
    if !valid {
        return Err(EntangleError::BadCoefficients(xi1, xi2));
    }
    if spec.dim() < 2 {
        return Err(EntangleError::DimensionTooSmall(spec.dim()));
    }
    let basis = OptimalBasis::new(spec, 0.0);
    let (plus, minus) = (basis.n_plus(), basis.n_minus());
    let chi = (plus * minus.transpose()).scale(xi1) - (minus * plus.transpose()).scale(xi2);
    BipartiteState::from_coefficients(chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, max_abs_diff_vec, real_vector};
    use crate::spin::{AxisSpec, RotationGenerator, SpinSystem};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn generator(s: f64, theta: f64) -> RotationGenerator {
        RotationGenerator::new(&SpinSystem::new(s).unwrap(), AxisSpec::new(theta).unwrap()).unwrap()
    }

    fn spin1_diagonal(xi: [f64; 3]) -> BipartiteState {
        BipartiteState::diagonal(&xi).unwrap()
    }

    #[test]
    fn rejects_bad_states() {
        assert!(matches!(
            BipartiteState::from_coefficients(CMatrix::identity(2, 2)),
            Err(EntangleError::NotNormalized(_))
        ));
        assert!(matches!(
            BipartiteState::from_coefficients(CMatrix::zeros(2, 3)),
            Err(EntangleError::BadShape { .. })
        ));
        assert!(matches!(maximally_entangled(1), Err(EntangleError::DimensionTooSmall(1))));
    }

    #[test]
    fn schmidt_of_maximal_and_product_states() {
        for m in 2..=6 {
            let form = schmidt(&maximally_entangled(m).unwrap()).unwrap();
            let expected = 1.0 / (m as f64).sqrt();
            assert!(form.xis.iter().all(|x| (x - expected).abs() < 1e-12));
            assert_eq!(form.rank(), m);
        }
        let a = real_vector(&[0.6, 0.8, 0.0]);
        let b = CVector::from_vec(vec![c(0.0, 0.6), cr(0.0), cr(0.8)]);
        let product = BipartiteState::from_coefficients(&a * b.transpose()).unwrap();
        let form = schmidt(&product).unwrap();
        assert_eq!(form.rank(), 1);
        assert!(max_abs_diff(&form.reconstruct(), product.chi()) < 1e-12);
    }

    #[test]
    fn schmidt_of_diagonal_state() {
        let xi = [0.8, 0.27_f64.sqrt(), 0.3];
        let form = schmidt(&spin1_diagonal(xi)).unwrap();
        for (got, want) in form.xis.iter().zip(&xi) {
            assert!((got - want).abs() < 1e-12);
        }
        for k in 0..3 {
            // computational basis up to a phase shared between u_k and v_k
            assert!((form.us[k][k].norm() - 1.0).abs() < 1e-12);
            assert!((form.vs[k][k].norm() - 1.0).abs() < 1e-12);
        }
        assert!(max_abs_diff(&form.reconstruct(), spin1_diagonal(xi).chi()) < 1e-12);
    }

    #[test]
    fn maximal_state_decomposes_onto_optimal_basis() {
        for m in 2..=9 {
            let s = (m as f64 - 1.0) / 2.0;
            let g = generator(s, 1.234);
            let basis = OptimalBasis::new(g.spectrum(), 0.0);
            let dec = ancilla_decomposition(&maximally_entangled(m).unwrap(), &basis).unwrap();
            for (i, c_i) in dec.cs.iter().enumerate() {
                assert!((c_i - 1.0 / (m as f64).sqrt()).abs() < 1e-12);
                let psi = dec.psis[i].as_ref().unwrap();
                assert!(max_abs_diff_vec(psi, &basis.phis()[i].conjugate()) < 1e-10);
            }
            assert!(dec.gram_deviation() < 1e-10);
        }
    }

    #[test]
    fn spin_one_branches_closed_form() {
        let xi = [0.5, 0.55_f64.sqrt(), 0.2_f64.sqrt()];
        for theta in [0.3, FRAC_PI_4, 1.9] {
            let g = generator(1.0, theta);
            let basis = OptimalBasis::new(g.spectrum(), 0.0);
            let dec = ancilla_decomposition(&spin1_diagonal(xi), &basis).unwrap();
            let (st, ct) = f64::sin_cos(theta);
            let r = FRAC_1_SQRT_2;
            let expected = [
                real_vector(&[xi[0] * r, 0.0, xi[2] * r]),
                real_vector(&[-xi[0] * st * r, xi[1] * ct, xi[2] * st * r]),
                real_vector(&[xi[0] * ct * r, xi[1] * st, -xi[2] * ct * r]),
            ];
            for (got, want) in dec.tildes.iter().zip(&expected) {
                assert!(max_abs_diff_vec(got, want) < 1e-10);
            }
            assert!((dec.total_weight() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_resolves_identity() {
        let g = generator(1.5, 0.7);
        let basis = OptimalBasis::new(g.spectrum(), 0.3);
        let chi = CMatrix::from_fn(4, 4, |i, j| c((i as f64 + 0.5) * 0.3, (j as f64 - 1.0) * 0.2));
        let norm = chi.norm();
        let psi = BipartiteState::from_coefficients(chi.unscale(norm)).unwrap();
        let dec = ancilla_decomposition(&psi, &basis).unwrap();
        assert!(max_abs_diff(&dec.reconstruct(&basis), psi.chi()) < 1e-10);
        for (i, p) in dec.present() {
            let rebuilt = p.scale(dec.cs[i]);
            assert!(max_abs_diff_vec(&rebuilt, &dec.tildes[i]) < 1e-10);
        }
        let wrong = OptimalBasis::new(generator(1.0, 0.7).spectrum(), 0.0);
        assert!(matches!(
            ancilla_decomposition(&psi, &wrong),
            Err(EntangleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spin_half_max_prob_state_closed_form() {
        for theta in [0.0, 0.4, 1.3, 2.8] {
            let g = generator(0.5, theta);
            let (x1, x2) = (0.6, 0.8);
            let chi = max_prob_state(g.spectrum(), x1, x2).unwrap();
            let st = theta.sin();
            let ct = theta.cos();
            let expected = CMatrix::from_row_slice(
                2,
                2,
                &[
                    0.5 * (x1 - x2) * ct,
                    -0.5 * x1 * (1.0 - st) - 0.5 * x2 * (1.0 + st),
                    0.5 * x1 * (1.0 + st) + 0.5 * x2 * (1.0 - st),
                    -0.5 * (x1 - x2) * ct,
                ]
                .map(cr),
            );
            assert!(max_abs_diff(chi.chi(), &expected) < 1e-12);
        }
    }

    #[test]
    fn spin_half_equal_weights_give_singlet() {
        let r = FRAC_1_SQRT_2;
        for theta in [0.2, 1.0, 2.5] {
            let g = generator(0.5, theta);
            let chi = max_prob_state(g.spectrum(), r, r).unwrap();
            let singlet = CMatrix::from_row_slice(2, 2, &[0.0, -r, r, 0.0].map(cr));
            assert!(max_abs_diff(chi.chi(), &singlet) < 1e-12);
        }
    }

    #[test]
    fn max_prob_state_has_only_extreme_branches() {
        for (s, theta) in [(1.0, 0.6), (1.5, 2.0), (3.0, 0.9)] {
            let g = generator(s, theta);
            let psi = max_prob_state(g.spectrum(), 0.6, 0.8).unwrap();
            let basis = OptimalBasis::new(g.spectrum(), 0.0);
            let dec = ancilla_decomposition(&psi, &basis).unwrap();
            let m = dec.dim();
            assert!(dec.cs[1..m - 1].iter().all(|c| *c < 1e-12));
            assert!((dec.cs[0].powi(2) + dec.cs[m - 1].powi(2) - 1.0).abs() < 1e-10);
            assert!(dec.gram_deviation() < 1e-10);
        }
        let g = generator(1.0, 0.6);
        assert!(matches!(
            max_prob_state(g.spectrum(), 0.6, 0.7),
            Err(EntangleError::BadCoefficients(..))
        ));
        assert!(max_prob_state(g.spectrum(), 1.0, 0.0).is_err());
    }

    #[test]
    fn extreme_weight_invariant_under_eigenvector_sign_flips() {
        let g = generator(1.0, 0.9);
        let psi = spin1_diagonal([0.5, 0.6, 0.39_f64.sqrt()]);
        let weight = |spec: &HamiltonianSpectrum| {
            let dec = ancilla_decomposition(&psi, &OptimalBasis::new(spec, 0.0)).unwrap();
            dec.cs[0].powi(2) + dec.cs[2].powi(2)
        };
        let reference = weight(g.spectrum());
        for (flip_top, flip_bottom) in [(true, false), (false, true), (true, true)] {
            let mut spec = g.spectrum().clone();
            if flip_top {
                spec.eigenstates[0] = -spec.eigenstates[0].clone();
            }
            if flip_bottom {
                spec.eigenstates[2] = -spec.eigenstates[2].clone();
            }
            assert!((weight(&spec) - reference).abs() < 1e-12);
        }
    }
}
