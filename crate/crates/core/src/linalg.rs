//! Small dense complex linear algebra: Hermitian eigendecomposition, SVD,
//! and projections onto orthogonal complements.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`. The
//! decompositions themselves are delegated to `nalgebra`; this module adds
//! ordering, the eigenvector phase convention and the tolerance checks the
//! rest of the crate relies on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Largest tolerated `|M - M†|` entry for a matrix claimed Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Adjacent eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Entries below this magnitude are skipped when fixing eigenvector phases.
pub const PHASE_ENTRY_TOL: f64 = 1e-9;
/// Gram-Schmidt drops spanning vectors whose residual falls below this
/// fraction of their original norm.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |M - M†| entry is {max_deviation:e}")]
    NotHermitian { max_deviation: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a complex vector from real entries.
pub fn real_vector(entries: &[f64]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&x| cr(x)))
}

/// `⟨a|b⟩`, antilinear in the first argument.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn is_finite_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vector(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry of `|M - M†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVector, b: &CVector) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Rotates the global phase of `v` so that its last entry with magnitude
/// above [`PHASE_ENTRY_TOL`] is real and positive.
pub fn fix_phase(v: &mut CVector) {
    if let Some(pivot) = v.iter().rev().find(|z| z.norm() > PHASE_ENTRY_TOL).copied() {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVector,
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Sorted by eigenvalue, largest first.
    pub pairs: Vec<EigenPair>,
    /// Set when two adjacent eigenvalues differ by less than [`DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl HermitianEigen {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.pairs.iter().map(|p| p.vector.clone()).collect()
    }

    /// Eigenvectors as the columns of a unitary matrix, in eigenvalue order.
    pub fn vector_matrix(&self) -> CMatrix {
        let cols: Vec<CVector> = self.vectors();
        CMatrix::from_columns(&cols)
    }
}

fn check_square(m: &CMatrix) -> Result<usize, LinalgError> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(LinalgError::Empty);
    }
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Each eigenvector carries the phase convention of [`fix_phase`].
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen, LinalgError> {
    check_square(m)?;
    if !is_finite_matrix(m) {
        return Err(LinalgError::NonFinite);
    }
    let max_deviation = hermitian_deviation(m);
    if max_deviation >= HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { max_deviation });
    }

    let eig = m.clone().symmetric_eigen();
    let mut pairs: Vec<EigenPair> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&value, col)| {
            let mut vector = col.into_owned();
            let norm = vector.norm();
            vector.unscale_mut(norm);
            fix_phase(&mut vector);
            EigenPair { value, vector }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));

    let degenerate = pairs
        .windows(2)
        .any(|w| (w[0].value - w[1].value).abs() < DEGENERACY_TOL);
    Ok(HermitianEigen { pairs, degenerate })
}

/// Singular value decomposition `M = Σ_k σ_k u_k v_k†`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let rows = self.left.first().map_or(0, |u| u.len());
        let cols = self.right.first().map_or(0, |v| v.len());
        let mut out = CMatrix::zeros(rows, cols);
        for ((s, u), v) in self.singular_values.iter().zip(&self.left).zip(&self.right) {
            out += (u * v.adjoint()).scale(*s);
        }
        out
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > tol).count()
    }
}

pub fn svd(m: &CMatrix) -> Result<Svd, LinalgError> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(LinalgError::Empty);
    }
    if !is_finite_matrix(m) {
        return Err(LinalgError::NonFinite);
    }
    let decomposition = m.clone().svd(true, true);
    let u = decomposition.u.expect("left vectors requested");
    let v_t = decomposition.v_t.expect("right vectors requested");

    let mut triplets: Vec<(f64, CVector, CVector)> = decomposition
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, u.column(k).into_owned(), v_t.row(k).adjoint()))
        .collect();
    triplets.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut out = Svd {
        singular_values: Vec::with_capacity(triplets.len()),
        left: Vec::with_capacity(triplets.len()),
        right: Vec::with_capacity(triplets.len()),
    };
    for (s, u, v) in triplets {
        out.singular_values.push(s);
        out.left.push(u);
        out.right.push(v);
    }
    Ok(out)
}

/// Subtracts the components of `v` along each vector of an orthonormal family.
fn remove_components(basis: &[CVector], v: &mut CVector) {
    for q in basis {
        let overlap = inner(q, v);
        v.axpy(-overlap, q, C64::new(1.0, 0.0));
    }
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt with one
/// re-orthogonalization pass. Numerically dependent vectors are dropped.
pub fn orthonormal_span(vectors: &[CVector]) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        remove_components(&basis, &mut w);
        remove_components(&basis, &mut w);
        let residual = w.norm();
        if residual > RANK_TOL * original {
            basis.push(w.unscale(residual));
        }
    }
    basis
}

/// `(I - P) target`, where `P` projects onto `span(vectors)`.
///
/// A zero result is a valid return value.
pub fn project_complement(vectors: &[CVector], target: &CVector) -> Result<CVector, LinalgError> {
    let dim = target.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(LinalgError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let basis = orthonormal_span(vectors);
    let mut out = target.clone();
    remove_components(&basis, &mut out);
    remove_components(&basis, &mut out);
    Ok(out)
}

/// Extends an orthonormal family to a full orthonormal basis of `C^dim`.
///
/// The given vectors come first, unchanged; the fill comes from
/// orthogonalizing the standard basis against them.
pub fn complete_orthonormal(family: &[CVector], dim: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = family.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = CVector::zeros(dim);
        e[k] = cr(1.0);
        remove_components(&basis, &mut e);
        remove_components(&basis, &mut e);
        let n = e.norm();
        if n > 1e-6 {
            basis.push(e.unscale(n));
        }
    }
    basis
}

/// Largest entry of `|V†V - I|` for the given family.
pub fn orthonormality_error(family: &[CVector]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in family.iter().enumerate() {
        for (j, b) in family.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(a, b) - cr(target)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        let a = random_matrix(rng, n, n);
        (&a + a.adjoint()).scale(0.5)
    }

    fn basis_vector(dim: usize, k: usize) -> CVector {
        let mut e = CVector::zeros(dim);
        e[k] = cr(1.0);
        e
    }

    #[test]
    fn diagonal_eigensystem() {
        let m = CMatrix::from_diagonal(&real_vector(&[0.0, 1.0, -1.0]));
        let eig = hermitian_eig(&m).unwrap();
        assert_eq!(eig.values(), vec![1.0, 0.0, -1.0]);
        assert!(max_abs_diff_vec(&eig.pairs[0].vector, &basis_vector(3, 1)) < 1e-14);
        assert!(max_abs_diff_vec(&eig.pairs[1].vector, &basis_vector(3, 0)) < 1e-14);
        assert!(max_abs_diff_vec(&eig.pairs[2].vector, &basis_vector(3, 2)) < 1e-14);
        assert!(!eig.degenerate);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=7 {
            let m = random_hermitian(&mut rng, n);
            let eig = hermitian_eig(&m).unwrap();
            let mut rebuilt = CMatrix::zeros(n, n);
            for p in &eig.pairs {
                rebuilt += (&p.vector * p.vector.adjoint()).scale(p.value);
                let residual = &m * &p.vector - p.vector.scale(p.value);
                assert!(residual.camax() < 1e-10);
            }
            assert!(max_abs_diff(&m, &rebuilt) < 1e-9);
            assert!(orthonormality_error(&eig.vectors()) < 1e-10);
            let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
            assert!((eig.values().iter().sum::<f64>() - trace).abs() < 1e-10);
            assert!(eig.values().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigenvector_phase_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_hermitian(&mut rng, 5);
        for p in hermitian_eig(&m).unwrap().pairs {
            let last = p.vector.iter().rev().find(|z| z.norm() > PHASE_ENTRY_TOL).unwrap();
            assert!(last.im.abs() < 1e-15 && last.re > 0.0);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = cr(1e-6);
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(LinalgError::NotSquare { .. })));
        let mut nan = CMatrix::identity(2, 2);
        nan[(0, 0)] = cr(f64::NAN);
        assert_eq!(hermitian_eig(&nan).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn degeneracy_is_flagged_not_rejected() {
        let m = CMatrix::from_diagonal(&real_vector(&[1.0, 1.0, 0.0]));
        let eig = hermitian_eig(&m).unwrap();
        assert!(eig.degenerate);
        assert!(orthonormality_error(&eig.vectors()) < 1e-12);
    }

    #[test]
    fn svd_scaled_identity() {
        let m = CMatrix::identity(4, 4).unscale(2.0);
        let d = svd(&m).unwrap();
        assert!(d.singular_values.iter().all(|s| (s - 0.5).abs() < 1e-14));
    }

    #[test]
    fn svd_rank_one() {
        let a = real_vector(&[1.0, 2.0, -0.5]);
        let b = CVector::from_vec(vec![c(0.3, 1.0), c(-2.0, 0.1), cr(0.7)]);
        let d = svd(&(&a * b.adjoint())).unwrap();
        assert_eq!(d.rank(1e-12), 1);
    }

    #[test]
    fn svd_diagonal_matches_sorted_entries() {
        let raw = [0.3_f64, 0.8, 27.0_f64.sqrt() / 10.0];
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let xi: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let d = svd(&CMatrix::from_diagonal(&real_vector(&xi))).unwrap();
        let mut sorted = xi.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in d.singular_values.iter().zip(&sorted) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_random_rectangular_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (rows, cols) in [(1, 1), (3, 5), (6, 2), (12, 12), (9, 11)] {
            let m = random_matrix(&mut rng, rows, cols);
            let d = svd(&m).unwrap();
            assert!(max_abs_diff(&m, &d.reconstruct()) < 1e-10);
            assert!(orthonormality_error(&d.left) < 1e-10);
            assert!(orthonormality_error(&d.right) < 1e-10);
            assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn complement_of_basis_vectors() {
        let e0 = basis_vector(3, 0);
        let e1 = basis_vector(3, 1);
        let r = project_complement(std::slice::from_ref(&e0), &e1).unwrap();
        assert!(max_abs_diff_vec(&r, &e1) < 1e-15);
        let r = project_complement(std::slice::from_ref(&e0), &e0).unwrap();
        assert!(r.norm() < 1e-15);
        let bad = project_complement(&[CVector::zeros(2)], &e0);
        assert!(matches!(bad, Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn complement_drops_dependent_vectors() {
        let a = real_vector(&[1.0, 1.0, 0.0]);
        let b = a.scale(2.0);
        let t = real_vector(&[0.0, 1.0, 1.0]);
        let r = project_complement(&[a.clone(), b], &t).unwrap();
        let expected = project_complement(&[a], &t).unwrap();
        assert!(max_abs_diff_vec(&r, &expected) < 1e-15);
    }

    #[test]
    fn completion_is_orthonormal() {
        let v = real_vector(&[1.0, 1.0, 1.0]).unscale(3.0_f64.sqrt());
        let basis = complete_orthonormal(std::slice::from_ref(&v), 3);
        assert_eq!(basis.len(), 3);
        assert!(orthonormality_error(&basis) < 1e-14);
        assert!(max_abs_diff_vec(&basis[0], &v) == 0.0);
    }
}
