//! Test-only oracles that share no code path with the engine.

#![allow(dead_code)]

use qreverse::{CMatrix, CVector, Complex64};

/// `exp(−itH)` by scaling and squaring of a truncated Taylor series.
pub fn taylor_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let d = h.nrows();
    let a = h * Complex64::new(0.0, -t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let scaled = &a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = CMatrix::identity(d, d);
    let mut sum = CMatrix::identity(d, d);
    for k in 1..30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Diagonal projector onto the basis states selected by `keep`.
pub fn diagonal_projector(d: usize, keep: impl Fn(usize) -> bool) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == j && keep(i) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Number of up spins (bit 0) in basis index `i` for `sites` spins.
pub fn up_count(i: usize, sites: usize) -> usize {
    sites - i.count_ones() as usize
}

/// `Prob[ω]` for `ρ = I/d` by pushing each basis vector through the chain of
/// projections and propagators and summing squared norms.
pub fn mixed_state_probability(projectors: &[CMatrix], propagators: &[CMatrix]) -> f64 {
    let d = projectors[0].nrows();
    let mut total = 0.0;
    for j in 0..d {
        let mut v = CVector::zeros(d);
        v[j] = Complex64::new(1.0, 0.0);
        for (k, p) in projectors.iter().enumerate() {
            v = p * v;
            if k + 1 < projectors.len() {
                v = &propagators[k] * v;
            }
        }
        total += v.norm_squared();
    }
    total / d as f64
}

/// All index sequences with `sizes[k]` choices at step `k`.
pub fn all_sequences(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}
