//! Spin-s operators, the rotation generator `H = S·n` for an axis in the
//! x-z plane, its spectrum, and the encoding unitary `exp(-iβH)`.
//!
//! Units are ħ = 1. Basis index `k` (0-based) carries `S_z` eigenvalue `s - k`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::{self, c, cr, CMatrix, CVector, LinalgError};

/// Tolerance on `2s` being an integer.
const SPIN_TOL: f64 = 1e-12;
/// Largest allowed spin; dimensions beyond this are not what this crate is for.
pub const MAX_TWICE_SPIN: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("invalid spin {0}: 2s must be a positive integer no larger than {MAX_TWICE_SPIN}")]
    InvalidSpin(f64),
    #[error("invalid polar angle {0}: must be finite and within [0, π]")]
    InvalidTheta(f64),
    #[error("rotation axis ({0}, {1}, {2}) is not a unit vector in the x-z plane")]
    OutOfPlaneAxis(f64, f64, f64),
    #[error("generator spectrum is degenerate")]
    DegenerateSpectrum,
    #[error("state has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Spin quantum number together with its three operator matrices.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    twice_s: u32,
    sx: CMatrix,
    sy: CMatrix,
    sz: CMatrix,
}

impl SpinSystem {
    /// Builds the spin-`s` operators. `s` must be a positive half-integer.
    pub fn new(s: f64) -> Result<Self, SpinError> {
        let twice = 2.0 * s;
        if !twice.is_finite() || (twice - twice.round()).abs() > SPIN_TOL || twice.round() < 1.0 {
            return Err(SpinError::InvalidSpin(s));
        }
        Self::from_twice_spin(twice.round() as u32)
    }

    pub fn from_twice_spin(twice_s: u32) -> Result<Self, SpinError> {
        if twice_s == 0 || twice_s > MAX_TWICE_SPIN {
            return Err(SpinError::InvalidSpin(f64::from(twice_s) / 2.0));
        }
        let s = f64::from(twice_s) / 2.0;
        let m = twice_s as usize + 1;

        // ⟨k-1| S₊ |k⟩ for the state with S_z = s - k.
        let mut raise = CMatrix::zeros(m, m);
        for k in 1..m {
            let mz = s - k as f64;
            raise[(k - 1, k)] = cr((s * (s + 1.0) - mz * (mz + 1.0)).sqrt());
        }
        let lower = raise.adjoint();
        let sx = (&raise + &lower).scale(0.5);
        let sy = (&raise - &lower) * c(0.0, -0.5);
        let sz = CMatrix::from_fn(m, m, |i, j| if i == j { cr(s - i as f64) } else { cr(0.0) });
        Ok(Self {
            twice_s,
            sx,
            sy,
            sz,
        })
    }

    pub fn s(&self) -> f64 {
        f64::from(self.twice_s) / 2.0
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    /// Hilbert-space dimension `m = 2s + 1`.
    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn sx(&self) -> &CMatrix {
        &self.sx
    }

    pub fn sy(&self) -> &CMatrix {
        &self.sy
    }

    pub fn sz(&self) -> &CMatrix {
        &self.sz
    }

    /// `4s²`, the largest QFI any probe state can reach for `H = S·n`.
    pub fn max_qfi(&self) -> f64 {
        let s = self.s();
        4.0 * s * s
    }

    /// Upper end of the interval on which `cos²(sβ)` is injective.
    pub fn fundamental_domain(&self) -> f64 {
        PI / (2.0 * self.s())
    }
}

/// Rotation axis `n = (sin θ, 0, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    theta: f64,
}

impl AxisSpec {
    pub fn new(theta: f64) -> Result<Self, SpinError> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(SpinError::InvalidTheta(theta));
        }
        Ok(Self { theta })
    }

    /// Accepts a unit direction vector, which must lie in the x-z plane.
    pub fn from_direction(n: [f64; 3]) -> Result<Self, SpinError> {
        let [x, y, z] = n;
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || y.abs() > 1e-12 || (norm - 1.0).abs() > 1e-12 || x < -1e-12 {
            return Err(SpinError::OutOfPlaneAxis(x, y, z));
        }
        Self::new(z.clamp(-1.0, 1.0).acos())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn direction(&self) -> [f64; 3] {
        [self.theta.sin(), 0.0, self.theta.cos()]
    }
}

/// `H = S_x sin θ + S_z cos θ`.
pub fn hamiltonian(sys: &SpinSystem, axis: AxisSpec) -> CMatrix {
    let [nx, _, nz] = axis.direction();
    sys.sx().scale(nx) + sys.sz().scale(nz)
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpectrum {
    /// `E_1 > … > E_m`.
    pub energies: Vec<f64>,
    /// `|E_i⟩`, real up to rounding, with the linalg phase convention.
    pub eigenstates: Vec<CVector>,
}

impl HamiltonianSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn top(&self) -> &CVector {
        &self.eigenstates[0]
    }

    pub fn bottom(&self) -> &CVector {
        &self.eigenstates[self.dim() - 1]
    }

    /// `exp(-iβH)|state⟩` by spectral exponentiation.
    pub fn evolve(&self, beta: f64, state: &CVector) -> CVector {
        let mut out = CVector::zeros(state.len());
        for (e, v) in self.energies.iter().zip(&self.eigenstates) {
            let amp = linalg::inner(v, state) * c(0.0, -beta * e).exp();
            out.axpy(amp, v, cr(1.0));
        }
        out
    }

    /// `exp(-iβH)` as a matrix.
    pub fn propagator(&self, beta: f64) -> CMatrix {
        let m = self.dim();
        let mut out = CMatrix::zeros(m, m);
        for (e, v) in self.energies.iter().zip(&self.eigenstates) {
            out += (v * v.adjoint()) * c(0.0, -beta * e).exp();
        }
        out
    }
}

pub fn spectrum(sys: &SpinSystem, axis: AxisSpec) -> Result<HamiltonianSpectrum, SpinError> {
    let eig = linalg::hermitian_eig(&hamiltonian(sys, axis))?;
    if eig.degenerate {
        return Err(SpinError::DegenerateSpectrum);
    }
    Ok(HamiltonianSpectrum {
        energies: eig.values(),
        eigenstates: eig.vectors(),
    })
}

/// A spin system with its axis fixed: the generator, its spectrum and the
/// encoding unitary, computed once.
#[derive(Debug, Clone)]
pub struct RotationGenerator {
    sys: SpinSystem,
    axis: AxisSpec,
    hamiltonian: CMatrix,
    spectrum: HamiltonianSpectrum,
}

impl RotationGenerator {
    pub fn new(sys: &SpinSystem, axis: AxisSpec) -> Result<Self, SpinError> {
        Ok(Self {
            sys: sys.clone(),
            axis,
            hamiltonian: hamiltonian(sys, axis),
            spectrum: spectrum(sys, axis)?,
        })
    }

    pub fn system(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn axis(&self) -> AxisSpec {
        self.axis
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &HamiltonianSpectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn evolve(&self, beta: f64, state: &CVector) -> CVector {
        self.spectrum.evolve(beta, state)
    }

    pub fn propagator(&self, beta: f64) -> CMatrix {
        self.spectrum.propagator(beta)
    }
}

/// `exp(-iβ S·n)|state⟩`.
pub fn evolve(
    sys: &SpinSystem,
    axis: AxisSpec,
    beta: f64,
    state: &CVector,
) -> Result<CVector, SpinError> {
    if state.len() != sys.dim() {
        return Err(SpinError::DimensionMismatch {
            expected: sys.dim(),
            got: state.len(),
        });
    }
    Ok(spectrum(sys, axis)?.evolve(beta, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, max_abs_diff_vec, orthonormality_error, real_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3};

    fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    fn random_state(rng: &mut impl Rng, dim: usize) -> CVector {
        let v = CVector::from_fn(dim, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let n = v.norm();
        v.unscale(n)
    }

    fn taylor_exp(h: &CMatrix, beta: f64, terms: usize) -> CMatrix {
        let n = h.nrows();
        let step = h * c(0.0, -beta);
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * &step / cr(k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let sys = SpinSystem::new(0.5).unwrap();
        let sx = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.5), cr(0.5), cr(0.0)]);
        let sz = CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.0), cr(0.0), cr(-0.5)]);
        assert!(max_abs_diff(sys.sx(), &sx) < 1e-15);
        assert!(max_abs_diff(sys.sz(), &sz) < 1e-15);
    }

    #[test]
    fn spin_one_matrices() {
        let sys = SpinSystem::new(1.0).unwrap();
        let r = FRAC_1_SQRT_2;
        let sx = CMatrix::from_row_slice(
            3,
            3,
            &[0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0].map(cr),
        );
        let sz = CMatrix::from_diagonal(&real_vector(&[1.0, 0.0, -1.0]));
        assert!(max_abs_diff(sys.sx(), &sx) < 1e-15);
        assert!(max_abs_diff(sys.sz(), &sz) < 1e-15);
    }

    #[test]
    fn commutation_and_casimir() {
        for twice in 1..=12 {
            let sys = SpinSystem::from_twice_spin(twice).unwrap();
            let i = c(0.0, 1.0);
            assert!(max_abs_diff(&commutator(sys.sx(), sys.sy()), &(sys.sz() * i)) < 1e-12);
            assert!(max_abs_diff(&commutator(sys.sy(), sys.sz()), &(sys.sx() * i)) < 1e-12);
            assert!(max_abs_diff(&commutator(sys.sz(), sys.sx()), &(sys.sy() * i)) < 1e-12);
            let s = sys.s();
            let casimir = sys.sx() * sys.sx() + sys.sy() * sys.sy() + sys.sz() * sys.sz();
            let m = sys.dim();
            let expected = CMatrix::identity(m, m).scale(s * (s + 1.0));
            assert!(max_abs_diff(&casimir, &expected) < 1e-10);
        }
    }

    #[test]
    fn invalid_spins_rejected() {
        for s in [0.0, -0.5, 0.3, 1.25, f64::NAN, 100.0] {
            assert!(matches!(SpinSystem::new(s), Err(SpinError::InvalidSpin(_))));
        }
    }

    #[test]
    fn axis_validation() {
        assert!(AxisSpec::new(-0.1).is_err());
        assert!(AxisSpec::new(PI + 1e-9).is_err());
        assert!(AxisSpec::new(f64::NAN).is_err());
        let a = AxisSpec::from_direction([0.6, 0.0, 0.8]).unwrap();
        assert!((a.theta() - 0.8_f64.acos()).abs() < 1e-15);
        assert!(matches!(
            AxisSpec::from_direction([0.6, 0.8, 0.0]),
            Err(SpinError::OutOfPlaneAxis(..))
        ));
        assert!(AxisSpec::from_direction([0.5, 0.0, 0.5]).is_err());
    }

    #[test]
    fn hamiltonian_along_z_and_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for twice in 1..=8 {
            let sys = SpinSystem::from_twice_spin(twice).unwrap();
            let h0 = hamiltonian(&sys, AxisSpec::new(0.0).unwrap());
            assert_eq!(&h0, sys.sz());
            let h = hamiltonian(&sys, AxisSpec::new(rng.random_range(0.0..PI)).unwrap());
            assert!(h.trace().norm() < 1e-14);
            assert!(h.iter().all(|z| z.im.abs() < 1e-14));
        }
    }

    #[test]
    fn spin_one_hamiltonian_closed_form() {
        let sys = SpinSystem::new(1.0).unwrap();
        let theta: f64 = 0.77;
        let (st, ct) = theta.sin_cos();
        let r = st * FRAC_1_SQRT_2;
        let expected =
            CMatrix::from_row_slice(3, 3, &[ct, r, 0.0, r, 0.0, r, 0.0, r, -ct].map(cr));
        let h = hamiltonian(&sys, AxisSpec::new(theta).unwrap());
        assert!(max_abs_diff(&h, &expected) < 1e-15);
    }

    #[test]
    fn spin_one_eigenstates_closed_form() {
        let sys = SpinSystem::new(1.0).unwrap();
        for theta in [0.05, 0.5, 1.2, FRAC_PI_3, 2.0, 3.0] {
            let spec = spectrum(&sys, AxisSpec::new(theta).unwrap()).unwrap();
            let (st, ct) = f64::sin_cos(theta);
            let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let r = st * FRAC_1_SQRT_2;
            let expected = [
                real_vector(&[ch * ch, r, sh * sh]),
                real_vector(&[-r, ct, r]),
                real_vector(&[sh * sh, -r, ch * ch]),
            ];
            for (got, want) in spec.eigenstates.iter().zip(&expected) {
                assert!(max_abs_diff_vec(got, want) < 1e-10, "theta {theta}");
            }
            assert_eq!(spec.energies.len(), 3);
            for (e, want) in spec.energies.iter().zip([1.0, 0.0, -1.0]) {
                assert!((e - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spin_half_eigenstates_closed_form() {
        let sys = SpinSystem::new(0.5).unwrap();
        for theta in [0.0, 0.3, 1.5, 2.9] {
            let spec = spectrum(&sys, AxisSpec::new(theta).unwrap()).unwrap();
            let (a, b) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            assert!(max_abs_diff_vec(&spec.eigenstates[0], &real_vector(&[a, b])) < 1e-10);
            assert!(max_abs_diff_vec(&spec.eigenstates[1], &real_vector(&[-b, a])) < 1e-10);
            assert!((spec.energies[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_two_residuals() {
        let sys = SpinSystem::new(2.0).unwrap();
        let axis = AxisSpec::new(0.7).unwrap();
        let h = hamiltonian(&sys, axis);
        let spec = spectrum(&sys, axis).unwrap();
        for (e, v) in spec.energies.iter().zip(&spec.eigenstates) {
            assert!((&h * v - v.scale(*e)).camax() < 1e-10);
        }
        assert!(orthonormality_error(&spec.eigenstates) < 1e-10);
    }

    #[test]
    fn spectrum_is_ladder_for_many_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for twice in 1..=12 {
            let sys = SpinSystem::from_twice_spin(twice).unwrap();
            for _ in 0..50 {
                let axis = AxisSpec::new(rng.random_range(0.0..=PI)).unwrap();
                let spec = spectrum(&sys, axis).unwrap();
                for (i, e) in spec.energies.iter().enumerate() {
                    assert!((e - (sys.s() - i as f64)).abs() < 1e-10);
                }
                for v in &spec.eigenstates {
                    assert!(v.iter().all(|z| z.im.abs() < 1e-10));
                }
            }
        }
    }

    #[test]
    fn evolution_basics() {
        let sys = SpinSystem::new(1.5).unwrap();
        let axis = AxisSpec::new(1.1).unwrap();
        let spec = spectrum(&sys, axis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = random_state(&mut rng, 4);
        assert!(max_abs_diff_vec(&evolve(&sys, axis, 0.0, &psi).unwrap(), &psi) < 1e-14);

        let top = spec.top().clone();
        let evolved = spec.evolve(0.9, &top);
        let phase = c(0.0, -0.9 * 1.5).exp();
        assert!(max_abs_diff_vec(&evolved, &(&top * phase)) < 1e-12);

        let out = spec.evolve(2.3, &psi);
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert!(evolve(&sys, axis, 0.1, &CVector::zeros(3)).is_err());
    }

    #[test]
    fn evolution_matches_taylor_series() {
        let sys = SpinSystem::new(1.0).unwrap();
        let axis = AxisSpec::new(FRAC_PI_3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_state(&mut rng, 3);
        let u = taylor_exp(&hamiltonian(&sys, axis), 0.4, 20);
        let got = evolve(&sys, axis, 0.4, &psi).unwrap();
        assert!(max_abs_diff_vec(&got, &(u * &psi)) < 1e-10);
    }

    #[test]
    fn group_law_and_energy_conservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for twice in 1..=6 {
            let sys = SpinSystem::from_twice_spin(twice).unwrap();
            let gen = RotationGenerator::new(&sys, AxisSpec::new(rng.random_range(0.0..PI)).unwrap())
                .unwrap();
            let psi = random_state(&mut rng, sys.dim());
            let (b1, b2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let two_step = gen.evolve(b1, &gen.evolve(b2, &psi));
            assert!(max_abs_diff_vec(&two_step, &gen.evolve(b1 + b2, &psi)) < 1e-10);

            let h = gen.hamiltonian();
            let energy = |v: &CVector| linalg::inner(v, &(h * v)).re;
            assert!((energy(&psi) - energy(&gen.evolve(b1, &psi))).abs() < 1e-10);

            let u = gen.propagator(b1);
            assert!(max_abs_diff_vec(&(&u * &psi), &gen.evolve(b1, &psi)) < 1e-12);
        }
    }
}
