use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::{Error, Result};

/// Relative numerical-rank threshold used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Rank-`k` operator `V_ij = sum_s u^(s)_i v^(s)_j` on an `N`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankOperator {
    dim: usize,
    u: Vec<Vec<Complex64>>,
    v: Vec<Vec<Complex64>>,
}

impl LowRankOperator {
    pub fn new(dim: usize, u: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch(format!("{} u-vectors but {} v-vectors", u.len(), v.len())));
        }
        if let Some(bad) = u.iter().chain(&v).find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch(format!("vector of length {} in dimension {dim}", bad.len())));
        }
        if u.iter().chain(&v).flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("low-rank vectors must be finite".into()));
        }
        Ok(LowRankOperator { dim, u, v })
    }

    pub fn zero(dim: usize) -> Self {
        LowRankOperator { dim, u: Vec::new(), v: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self, s: usize) -> &[Complex64] {
        &self.u[s]
    }

    pub fn v(&self, s: usize) -> &[Complex64] {
        &self.v[s]
    }

    pub fn u_vectors(&self) -> &[Vec<Complex64>] {
        &self.u
    }

    pub fn v_vectors(&self) -> &[Vec<Complex64>] {
        &self.v
    }
}

pub fn lowrank_to_dense(v: &LowRankOperator) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.dim, v.dim, |i, j| (0..v.rank()).map(|s| v.u[s][i] * v.v[s][j]).sum())
}

/// Factors a square matrix through a column-pivoted Householder QR,
/// `M P = Q R`, truncated at the first pivot whose remaining column norm
/// falls below `tol` times the largest initial column norm.
pub fn dense_to_lowrank(m: &ComplexMatrix, tol: f64) -> Result<LowRankOperator> {
    let n = m.require_square()?;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::new();

    let col_norm = |a: &ComplexMatrix, j: usize, from: usize| -> f64 {
        (from..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt()
    };
    let reference = (0..n).map(|j| col_norm(&a, j, 0)).fold(0.0, f64::max);
    let threshold = tol * reference;

    let mut rank = 0;
    for j in 0..n {
        let (p, pnorm) = (j..n)
            .map(|c| (c, col_norm(&a, c, j)))
            .fold((j, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pnorm <= threshold || pnorm == 0.0 {
            break;
        }
        if p != j {
            for i in 0..n {
                let tmp = a[(i, j)];
                a[(i, j)] = a[(i, p)];
                a[(i, p)] = tmp;
            }
            perm.swap(j, p);
        }
        // Reflector mapping a[j.., j] onto -phase * |x| e_1.
        let x0 = a[(j, j)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * pnorm;
        let mut w: Vec<Complex64> = (j..n).map(|i| a[(i, j)]).collect();
        w[0] -= alpha;
        let wnorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wnorm > 0.0 {
            for z in &mut w {
                *z /= wnorm;
            }
            for c in j..n {
                let proj: Complex64 = (j..n).map(|i| w[i - j].conj() * a[(i, c)]).sum();
                for i in j..n {
                    a[(i, c)] -= 2.0 * w[i - j] * proj;
                }
            }
        }
        reflectors.push(w);
        rank += 1;
    }

    let mut u_vectors = Vec::with_capacity(rank);
    let mut v_vectors = Vec::with_capacity(rank);
    for s in 0..rank {
        // Q e_s = H_0 H_1 ... H_{rank-1} e_s
        let mut q = vec![ZERO; n];
        q[s] = Complex64::new(1.0, 0.0);
        for (j, w) in reflectors.iter().enumerate().rev() {
            let proj: Complex64 = (j..n).map(|i| w[i - j].conj() * q[i]).sum();
            for i in j..n {
                q[i] -= 2.0 * w[i - j] * proj;
            }
        }
        let mut row = vec![ZERO; n];
        for (pos, &col) in perm.iter().enumerate() {
            if pos >= s {
                row[col] = a[(s, pos)];
            }
        }
        u_vectors.push(q);
        v_vectors.push(row);
    }
    LowRankOperator::new(n, u_vectors, v_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_lowrank, seeded};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn rank_zero_is_zero_matrix() {
        assert_eq!(lowrank_to_dense(&LowRankOperator::zero(2)), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn rank_one_all_ones() {
        let v = LowRankOperator::new(2, vec![vec![c(1.0), c(1.0)]], vec![vec![c(1.0), c(1.0)]]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(lowrank_to_dense(&v), want);
    }

    #[test]
    fn two_basis_projectors_make_identity() {
        let e1 = vec![c(1.0), c(0.0)];
        let e2 = vec![c(0.0), c(1.0)];
        let v = LowRankOperator::new(2, vec![e1.clone(), e2.clone()], vec![e1, e2]).unwrap();
        assert_eq!(lowrank_to_dense(&v), ComplexMatrix::identity(2));
    }

    #[test]
    fn constructor_checks_lengths() {
        assert!(LowRankOperator::new(2, vec![vec![c(1.0)]], vec![vec![c(1.0), c(0.0)]]).is_err());
        assert!(LowRankOperator::new(2, vec![], vec![vec![c(1.0), c(0.0)]]).is_err());
    }

    #[test]
    fn numerical_rank_examples() {
        assert_eq!(dense_to_lowrank(&ComplexMatrix::zeros(3, 3), DEFAULT_RANK_TOL).unwrap().rank(), 0);
        let ones = ComplexMatrix::from_fn(5, 5, |_, _| c(1.0));
        let f = dense_to_lowrank(&ones, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(lowrank_to_dense(&f).max_abs_diff(&ones) < 1e-14);
        assert_eq!(dense_to_lowrank(&ComplexMatrix::identity(2), 1e-12).unwrap().rank(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn factorization_reproduces_lowrank_input(seed in any::<u64>(), n in 1usize..9, k in 0usize..4) {
            let mut rng = seeded(seed);
            let k = k.min(n);
            let m = lowrank_to_dense(&random_lowrank(&mut rng, n, k));
            let f = dense_to_lowrank(&m, DEFAULT_RANK_TOL).unwrap();
            prop_assert!(f.rank() <= k);
            let scale = m.max_abs().max(1.0);
            prop_assert!(lowrank_to_dense(&f).max_abs_diff(&m) <= DEFAULT_RANK_TOL * scale);
            // Idempotence of the round trip.
            let again = lowrank_to_dense(&dense_to_lowrank(&lowrank_to_dense(&f), DEFAULT_RANK_TOL).unwrap());
            prop_assert!(again.max_abs_diff(&lowrank_to_dense(&f)) <= DEFAULT_RANK_TOL * scale);
        }
    }
}
