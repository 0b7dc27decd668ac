use num_complex::Complex64;

use crate::numerics::{ComplexMatrix, ONE, ZERO};
use crate::{Error, Result};

/// Largest dimension accepted by [`permanent_ryser`].
pub const RYSER_MAX_DIM: usize = 30;

/// Ryser's inclusion-exclusion formula with column subsets visited in Gray
/// code order, so each step updates the row sums by a single column.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let n = m.require_square()?;
    if n > RYSER_MAX_DIM {
        return Err(Error::GuardExceeded(format!(
            "Ryser permanent limited to {RYSER_MAX_DIM}x{RYSER_MAX_DIM}, got {n}x{n}"
        )));
    }
    if n == 0 {
        return Ok(ONE);
    }
    let mut row_sums = vec![ZERO; n];
    let mut in_subset = vec![false; n];
    let mut total = ZERO;
    let mut subset_odd = false;
    for g in 1u64..(1u64 << n) {
        let j = g.trailing_zeros() as usize;
        let adding = !in_subset[j];
        in_subset[j] = adding;
        subset_odd = !subset_odd;
        for (i, rs) in row_sums.iter_mut().enumerate() {
            if adding {
                *rs += m[(i, j)];
            } else {
                *rs -= m[(i, j)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if subset_odd {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

/// Permanent of the matrix obtained by repeating row `i` `row_occ[i]` times
/// and column `j` `col_occ[j]` times.
pub fn permanent_submatrix(m: &ComplexMatrix, row_occ: &[usize], col_occ: &[usize]) -> Result<Complex64> {
    if row_occ.len() != m.rows() || col_occ.len() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "occupations of length {}/{} for a {}x{} matrix",
            row_occ.len(),
            col_occ.len(),
            m.rows(),
            m.cols()
        )));
    }
    let nr: usize = row_occ.iter().sum();
    let nc: usize = col_occ.iter().sum();
    if nr != nc {
        return Err(Error::Unbalanced { rows: nr, cols: nc });
    }
    let expand = |occ: &[usize]| -> Vec<usize> {
        occ.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k)).collect()
    };
    permanent_ryser(&m.select(&expand(row_occ), &expand(col_occ)))
}
