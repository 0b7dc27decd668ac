//! Seeded random instances for oracle comparisons and benchmarks.
//!
//! Every generator draws from a [`ChaCha8Rng`], so a seed fixes the instance
//! bit-for-bit on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

use crate::numerics::{dot_conj, norm, ComplexMatrix, LowRankOperator};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed unit disk.
pub fn unit_disk(rng: &mut impl Rng) -> Complex64 {
    loop {
        let re = rng.gen_range(-1.0..=1.0);
        let im = rng.gen_range(-1.0..=1.0);
        if re * re + im * im <= 1.0 {
            return Complex64::new(re, im);
        }
    }
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| unit_disk(rng)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| unit_disk(rng))
}

pub fn random_lowrank(rng: &mut impl Rng, n: usize, k: usize) -> LowRankOperator {
    random_lowrank_scaled(rng, n, k, 1.0)
}

/// Rank-`k` operator with every vector entry drawn from the disk of radius `scale`.
pub fn random_lowrank_scaled(rng: &mut impl Rng, n: usize, k: usize, scale: f64) -> LowRankOperator {
    let mut draw = || -> Vec<Complex64> { (0..n).map(|_| unit_disk(rng) * scale).collect() };
    let u = (0..k).map(|_| draw()).collect();
    let v = (0..k).map(|_| draw()).collect();
    LowRankOperator::new(n, u, v).expect("consistent lengths")
}

/// `k` orthonormal vectors in `C^n` (modified Gram-Schmidt, twice).
pub fn random_orthonormal(rng: &mut impl Rng, n: usize, k: usize) -> Vec<Vec<Complex64>> {
    assert!(k <= n, "cannot fit {k} orthonormal vectors in dimension {n}");
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut w = random_vector(rng, n);
        for _ in 0..2 {
            for q in &out {
                let p = dot_conj(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= p * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw < 1e-6 {
            continue;
        }
        out.push(w.into_iter().map(|x| x / nw).collect());
    }
    out
}

/// Unitary matrix whose columns are an orthonormalized random basis.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let cols = random_orthonormal(rng, n, n);
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}
