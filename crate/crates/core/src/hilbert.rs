//! Finite-dimensional Hilbert-space primitives.
//!
//! Everything here works on dense complex matrices with `ħ = 1`. Operators
//! are validated on construction and immutable afterwards, so values can be
//! shared freely between threads.
//!
//! Time reversal is represented by [`AntiunitaryInvolution`], an antilinear
//! map `ψ ↦ V·conj(ψ)` written as a unitary `V` followed by entrywise complex
//! conjugation in the computational basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for construction invariants (Hermiticity, unitarity, trace).
pub const INVARIANT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry modulus of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

fn unitary_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(d, d))
}

/// Build a complex matrix from a real one.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Kronecker product of a list of factors, leftmost factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// A normalized complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// True when the states agree up to a global phase.
    pub fn equals_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// A Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        ensure_square(&entries)?;
        let asym = hermitian_asymmetry(&entries);
        if asym > INVARIANT_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max asymmetry {asym:e})"
            )));
        }
        let trace = entries.trace();
        if (trace - ONE).norm() > INVARIANT_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {trace}, expected 1"
            )));
        }
        let min_eig = SymmetricEigen::new(hermitize(&entries))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -INVARIANT_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { entries })
    }

    /// The normalized identity `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let entries = CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        Self { entries }
    }

    pub fn pure(state: &StateVector) -> Self {
        Self {
            entries: state.projector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// Max entry deviation from `I/d`.
    pub fn deviation_from_maximally_mixed(&self) -> f64 {
        max_abs_diff(&self.entries, Self::maximally_mixed(self.dim()).matrix())
    }

    /// Spectral decomposition as (weight, pure state) pairs with positive weight.
    pub fn mixture(&self) -> Vec<(f64, StateVector)> {
        let eig = SymmetricEigen::new(hermitize(&self.entries));
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .filter_map(|(k, &w)| {
                StateVector::new(eig.eigenvectors.column(k).into_owned())
                    .ok()
                    .map(|s| (w, s))
            })
            .collect()
    }
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// A Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        ensure_square(&entries)?;
        let max_asymmetry = hermitian_asymmetry(&entries);
        if max_asymmetry > INVARIANT_TOL {
            return Err(Error::NotHermitian { max_asymmetry });
        }
        Ok(Self { entries })
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(complexify(entries))
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn sum(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn difference(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        Self {
            entries: &self.entries * Complex64::new(factor, 0.0),
        }
    }

    /// Eigenvalues (ascending) and matching orthonormal eigenvectors.
    fn spectrum(&self) -> Vec<(f64, CVector)> {
        let eig = SymmetricEigen::new(hermitize(&self.entries));
        let mut pairs: Vec<(f64, CVector)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, eig.eigenvectors.column(k).into_owned()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }
}

/// A unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    entries: CMatrix,
}

impl UnitaryOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        ensure_square(&entries)?;
        let deviation = unitary_deviation(&entries);
        if deviation > INVARIANT_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn compose(&self, other: &UnitaryOperator) -> Result<UnitaryOperator> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries * &other.entries,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        ensure_dim(self.dim(), state.dim())?;
        StateVector::new(&self.entries * state.amplitudes())
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        unitary_deviation(&self.entries)
    }
}

/// Antilinear involution `ψ ↦ V·conj(ψ)` with `V` unitary and `V·conj(V) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiunitaryInvolution {
    basis_map: CMatrix,
}

impl AntiunitaryInvolution {
    pub fn new(basis_map: CMatrix) -> Result<Self> {
        ensure_square(&basis_map)?;
        let deviation = unitary_deviation(&basis_map);
        if deviation > INVARIANT_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        let d = basis_map.nrows();
        let square = &basis_map * basis_map.map(|z| z.conj());
        let deviation = max_abs_diff(&square, &CMatrix::identity(d, d));
        if deviation > INVARIANT_TOL {
            return Err(Error::NotInvolution { deviation });
        }
        Ok(Self { basis_map })
    }

    /// Plain complex conjugation in the computational basis (`V = I`).
    pub fn conjugation(dim: usize) -> Self {
        Self {
            basis_map: CMatrix::identity(dim, dim),
        }
    }

    /// Spin reversal `V = ⊗ iσ_y`. Only an involution for an even number of
    /// sites, since `(iσ_y)·conj(iσ_y) = −I` on a single spin.
    pub fn spin_flip(sites: usize) -> Result<Self> {
        let isy = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        Self::new(kron_all(&vec![isy; sites]))
    }

    pub fn dim(&self) -> usize {
        self.basis_map.nrows()
    }

    pub fn basis_map(&self) -> &CMatrix {
        &self.basis_map
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        ensure_dim(self.dim(), state.dim())?;
        let conj = state.amplitudes().map(|z| z.conj());
        StateVector::new(&self.basis_map * conj)
    }

    /// The operator `π A π`, i.e. `V · conj(A) · V†`.
    pub fn conjugate_operator(&self, a: &CMatrix) -> Result<CMatrix> {
        ensure_square(a)?;
        ensure_dim(self.dim(), a.nrows())?;
        Ok(&self.basis_map * a.map(|z| z.conj()) * self.basis_map.adjoint())
    }
}

/// One eigenvalue cluster with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub eigenvalue: f64,
    pub basis: Vec<StateVector>,
}

impl EigenCluster {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projector onto the cluster's eigenspace.
    pub fn projector(&self) -> CMatrix {
        let d = self.basis[0].dim();
        self.basis
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + v.projector())
    }
}

/// Eigenvalues in ascending order with near-degenerate eigenvalues merged.
///
/// Consecutive sorted eigenvalues whose gap is within `cluster_tol` share a
/// cluster; the cluster eigenvalue is the mean of its members.
pub fn eigendecompose(h: &HermitianOperator, cluster_tol: f64) -> Result<Vec<EigenCluster>> {
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidTolerance(cluster_tol));
    }
    let mut clusters: Vec<(Vec<f64>, Vec<StateVector>)> = Vec::new();
    for (value, vector) in h.spectrum() {
        let state = StateVector::new(vector)?;
        match clusters.last_mut() {
            Some((values, basis)) if value - values.last().unwrap() <= cluster_tol => {
                values.push(value);
                basis.push(state);
            }
            _ => clusters.push((vec![value], vec![state])),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(values, basis)| EigenCluster {
            eigenvalue: values.iter().sum::<f64>() / values.len() as f64,
            basis,
        })
        .collect())
}

/// `U(t) = exp(−itH)` through the eigendecomposition of `H`.
pub fn evolve(h: &HermitianOperator, t: f64) -> UnitaryOperator {
    let d = h.dim();
    let mut u = CMatrix::zeros(d, d);
    for (value, v) in h.spectrum() {
        let phase = Complex64::from_polar(1.0, -t * value);
        u += (&v * v.adjoint()) * phase;
    }
    UnitaryOperator { entries: u }
}

/// Outcome of [`check_reversal_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalSymmetry {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Tests `π U(t) π = U(t)†` at time `t`.
pub fn check_reversal_symmetry(
    h: &HermitianOperator,
    pi: &AntiunitaryInvolution,
    t: f64,
    tol: f64,
) -> Result<ReversalSymmetry> {
    ensure_dim(pi.dim(), h.dim())?;
    let u = evolve(h, t);
    let reversed = pi.conjugate_operator(u.matrix())?;
    let max_deviation = max_abs_diff(&reversed, &u.matrix().adjoint());
    Ok(ReversalSymmetry {
        holds: max_deviation <= tol,
        max_deviation,
    })
}

/// `‖πHπ − H‖_max`, the time-independent form of the reversal check.
pub fn hamiltonian_reversal_deviation(
    h: &HermitianOperator,
    pi: &AntiunitaryInvolution,
) -> Result<f64> {
    let reversed = pi.conjugate_operator(h.matrix())?;
    Ok(max_abs_diff(&reversed, h.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    fn precession(omega: f64) -> HermitianOperator {
        // ω(1 − σ_x)/2
        let m = (CMatrix::identity(2, 2) - pauli_x()) * c(omega / 2.0, 0.0);
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn zero_operator_is_one_cluster() {
        let clusters = eigendecompose(&HermitianOperator::zero(2), 1e-8).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].eigenvalue, 0.0);
        assert_eq!(clusters[0].dim(), 2);
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 + 1e-12, 3.0]));
        let clusters = eigendecompose(&HermitianOperator::from_real(&h).unwrap(), 1e-8).unwrap();
        let summary: Vec<(f64, usize)> = clusters.iter().map(|c| (c.eigenvalue, c.dim())).collect();
        assert_eq!(summary.len(), 2);
        assert!((summary[0].0 - 1.0).abs() < 1e-11 && summary[0].1 == 2);
        assert!((summary[1].0 - 3.0).abs() < 1e-12 && summary[1].1 == 1);
    }

    #[test]
    fn precession_hamiltonian_spectrum() {
        // Characteristic polynomial of [[1/2, -1/2], [-1/2, 1/2]] is λ(λ − 1).
        let clusters = eigendecompose(&precession(1.0), 1e-8).unwrap();
        assert_eq!(clusters.len(), 2);
        assert!(clusters[0].eigenvalue.abs() < 1e-12);
        assert!((clusters[1].eigenvalue - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_slice(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let minus = StateVector::from_slice(&[c(s, 0.0), c(-s, 0.0)]).unwrap();
        assert!(clusters[0].basis[0].equals_up_to_phase(&plus, 1e-10));
        assert!(clusters[1].basis[0].equals_up_to_phase(&minus, 1e-10));
    }

    #[test]
    fn non_hermitian_input_rejected_with_asymmetry() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { max_asymmetry }) => assert_eq!(max_asymmetry, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let u = evolve(&h, 0.0);
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(5, 5)) < 1e-14);
    }

    #[test]
    fn half_period_flips_the_spin() {
        let omega = 1.3;
        let u = evolve(&precession(omega), std::f64::consts::PI / omega);
        let up = StateVector::basis(2, 0).unwrap();
        let down = StateVector::basis(2, 1).unwrap();
        assert!(u.apply(&up).unwrap().equals_up_to_phase(&down, 1e-10));
    }

    #[test]
    fn evolution_group_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(6, &mut rng);
        let fwd = evolve(&h, 0.7);
        let back = evolve(&h, -0.7);
        let id = CMatrix::identity(6, 6);
        assert!(max_abs_diff(&(fwd.matrix() * back.matrix()), &id) < 1e-12);
        assert!(fwd.unitarity_deviation() < 1e-12);
        let composed = evolve(&h, 0.3).compose(&evolve(&h, 0.4)).unwrap();
        assert!(max_abs_diff(composed.matrix(), fwd.matrix()) < 1e-10);
    }

    #[test]
    fn spectral_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1, 2, 7, 16] {
            let h = random_hermitian(d, &mut rng);
            let clusters = eigendecompose(&h, 1e-8).unwrap();
            let total: usize = clusters.iter().map(EigenCluster::dim).sum();
            assert_eq!(total, d);
            let rebuilt = clusters.iter().fold(CMatrix::zeros(d, d), |acc, c| {
                acc + c.projector() * Complex64::new(c.eigenvalue, 0.0)
            });
            assert!(max_abs_diff(&rebuilt, h.matrix()) < 1e-10);
            for w in clusters.windows(2) {
                assert!(w[0].eigenvalue < w[1].eigenvalue);
                let overlap = w[0].projector() * w[1].projector();
                assert!(max_abs(&overlap) < 1e-10);
            }
        }
    }

    #[test]
    fn conjugation_fixes_real_and_flips_imaginary() {
        let pi = AntiunitaryInvolution::conjugation(2);
        let real = StateVector::from_slice(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        assert_eq!(pi.apply(&real).unwrap(), real);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = StateVector::from_slice(&[c(s, 0.0), c(0.0, s)]).unwrap();
        let w = pi.apply(&v).unwrap();
        assert!((w.amplitudes()[1] - c(0.0, -s)).norm() < 1e-15);
    }

    #[test]
    fn involution_applied_twice_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pis = [
            AntiunitaryInvolution::conjugation(4),
            AntiunitaryInvolution::spin_flip(2).unwrap(),
            AntiunitaryInvolution::new(pauli_x().kronecker(&pauli_x())).unwrap(),
        ];
        for _ in 0..100 {
            let psi = random_state(4, &mut rng);
            for pi in &pis {
                let back = pi.apply(&pi.apply(&psi).unwrap()).unwrap();
                let diff = (back.amplitudes() - psi.amplitudes()).camax();
                assert!(diff < 1e-12);
            }
        }
    }

    #[test]
    fn single_spin_flip_is_not_an_involution() {
        assert!(matches!(
            AntiunitaryInvolution::spin_flip(1),
            Err(Error::NotInvolution { .. })
        ));
    }

    #[test]
    fn conjugate_operator_cases() {
        let pi = AntiunitaryInvolution::conjugation(2);
        let id = CMatrix::identity(2, 2);
        assert_eq!(pi.conjugate_operator(&id).unwrap(), id);
        // σ_y has purely imaginary entries and is negated; iσ_y is real and fixed.
        let sy = pauli_y();
        assert_eq!(pi.conjugate_operator(&sy).unwrap(), -sy.clone());
        let isy = pauli_y() * c(0.0, 1.0);
        assert_eq!(pi.conjugate_operator(&isy).unwrap(), isy);
    }

    #[test]
    fn conjugated_projector_stays_a_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v = pauli_x().kronecker(&CMatrix::identity(2, 2));
        let pi = AntiunitaryInvolution::new(v).unwrap();
        for _ in 0..20 {
            let a = random_state(4, &mut rng).projector();
            let b = random_state(4, &mut rng).projector();
            let p = a + b;
            let p = {
                // Orthonormalize to get a rank-2 projector.
                let clusters = eigendecompose(&HermitianOperator::new(p).unwrap(), 1e-8).unwrap();
                clusters.last().unwrap().projector()
            };
            let q = pi.conjugate_operator(&p).unwrap();
            assert!(max_abs_diff(&(&q * &q), &q) < 1e-12);
            assert!((q.trace() - p.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn reversal_symmetry_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let pi = AntiunitaryInvolution::conjugation(4);
        let real = crate::random::random_real_symmetric(4, &mut rng);
        let r = check_reversal_symmetry(&real, &pi, 0.9, 1e-12).unwrap();
        assert!(r.holds, "deviation {}", r.max_deviation);

        let sy = HermitianOperator::new(pauli_y()).unwrap();
        let r = check_reversal_symmetry(&sy, &AntiunitaryInvolution::conjugation(2), 1.0, 1e-12)
            .unwrap();
        assert!(!r.holds);
        assert!(r.max_deviation > 0.5);

        let flip = AntiunitaryInvolution::spin_flip(2).unwrap();
        let r = check_reversal_symmetry(&HermitianOperator::zero(4), &flip, 2.0, 1e-12).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn reversal_symmetry_is_time_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pi = AntiunitaryInvolution::conjugation(8);
        let h = crate::random::random_real_symmetric(8, &mut rng);
        assert!(check_reversal_symmetry(&h, &pi, 0.5, 1e-10).unwrap().holds);
        for k in 0..10 {
            let t = 0.37 * (k as f64 + 1.0);
            assert!(check_reversal_symmetry(&h, &pi, t, 1e-10).unwrap().holds);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!(DensityMatrix::new(mixed.matrix().clone()).is_ok());
        let weights: f64 = mixed.mixture().iter().map(|(w, _)| w).sum();
        assert!((weights - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let pi = AntiunitaryInvolution::conjugation(2);
        let psi = StateVector::basis(3, 0).unwrap();
        assert!(matches!(
            pi.apply(&psi),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
