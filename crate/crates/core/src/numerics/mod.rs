//! Dense complex linear algebra and the finite-rank operator representation.

mod io;
mod lowrank;
mod matrix;

pub use io::{LowRankJson, MatrixJson};
pub use lowrank::{dense_to_lowrank, lowrank_to_dense, LowRankOperator, DEFAULT_RANK_TOL};
pub use matrix::{determinant, mat_mul, ComplexMatrix, Lu};

use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `sum_i conj(a_i) b_i`
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
