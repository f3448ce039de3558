//! Seeded random operators and states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{CMatrix, CVector, HermitianOperator, StateVector};

/// Real symmetric matrix with standard normal entries above the diagonal
/// (GOE-like). Invariant under plain complex conjugation.
pub fn random_real_symmetric<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    HermitianOperator::from_real(&m).expect("symmetric by construction")
}

/// Complex Hermitian matrix with Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..dim {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).expect("Hermitian by construction")
}

/// Haar-distributed pure state.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if let Ok(s) = StateVector::new(v) {
            return s;
        }
    }
}
