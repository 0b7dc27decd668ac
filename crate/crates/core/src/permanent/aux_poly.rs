use num_complex::Complex64;

use crate::numerics::{LowRankOperator, ONE, ZERO};
use crate::{Error, Result};

/// Dense tables are used for rank <= 2 while `(N+1)^(2k)` stays below this.
const DENSE_MAX_ENTRIES: usize = 1 << 24;
/// Hard cap on stored coefficients for either layout (16 bytes each).
const TABLE_MAX_ENTRIES: usize = 1 << 26;
/// Largest `n` whose factorial is finite in double precision.
const MAX_DIRECT_FACTORIAL: usize = 170;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// Full array over `(n_1..n_k, n'_1..n'_k)`, extent `N+1` per axis.
    Dense,
    /// One square block per total degree `d`, rows and columns indexed by
    /// the compositions of `d` into `k` parts.
    DegreeSliced,
}

/// Coefficients `F_{n_1..n_k, n'_1..n'_k}` of the auxiliary polynomial.
///
/// Only coefficients with `sum n == sum n'` can be nonzero; they are the only
/// ones ever written.
#[derive(Debug, Clone)]
pub struct DiagonalCoeffTable {
    rank: usize,
    max_degree: usize,
    storage: Storage,
}

#[derive(Debug, Clone)]
enum Storage {
    Dense { strides: Vec<usize>, data: Vec<Complex64> },
    Sliced { comps: Compositions, slices: Vec<Vec<Complex64>> },
}

impl DiagonalCoeffTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn layout(&self) -> TableLayout {
        match self.storage {
            Storage::Dense { .. } => TableLayout::Dense,
            Storage::Sliced { .. } => TableLayout::DegreeSliced,
        }
    }

    /// Number of stored coefficients, zero or not.
    pub fn stored_len(&self) -> usize {
        match &self.storage {
            Storage::Dense { data, .. } => data.len(),
            Storage::Sliced { slices, .. } => slices.iter().map(Vec::len).sum(),
        }
    }

    /// `F_{n, n'}`; zero for any multi-degree outside the table.
    pub fn coeff(&self, n: &[usize], n_prime: &[usize]) -> Complex64 {
        assert_eq!(n.len(), self.rank, "multi-degree length must equal the rank");
        assert_eq!(n_prime.len(), self.rank, "multi-degree length must equal the rank");
        if n.iter().chain(n_prime).any(|&x| x > self.max_degree) {
            return ZERO;
        }
        match &self.storage {
            Storage::Dense { strides, data } => {
                let idx: usize = n.iter().chain(n_prime).zip(strides).map(|(d, s)| d * s).sum();
                data[idx]
            }
            Storage::Sliced { comps, slices } => {
                let (d, dp) = (n.iter().sum::<usize>(), n_prime.iter().sum::<usize>());
                if d != dp || d > self.max_degree {
                    return ZERO;
                }
                let (Some(i), Some(j)) = (comps.index_of(n), comps.index_of(n_prime)) else {
                    return ZERO;
                };
                slices[d][i * comps.count(d) + j]
            }
        }
    }

    /// Visits every diagonal coefficient `F_{n,n}` with its multi-degree `n`.
    pub fn for_each_diagonal(&self, mut f: impl FnMut(&[usize], Complex64)) {
        let k = self.rank;
        match &self.storage {
            Storage::Dense { strides, data } => {
                let mut n = vec![0usize; k];
                loop {
                    if n.iter().sum::<usize>() <= self.max_degree {
                        let idx: usize = (0..k).map(|r| n[r] * (strides[r] + strides[k + r])).sum();
                        f(&n, data[idx]);
                    }
                    // advance odometer
                    let mut axis = k;
                    loop {
                        if axis == 0 {
                            return;
                        }
                        axis -= 1;
                        if n[axis] < self.max_degree {
                            n[axis] += 1;
                            break;
                        }
                        n[axis] = 0;
                    }
                }
            }
            Storage::Sliced { comps, slices } => {
                for (d, slice) in slices.iter().enumerate() {
                    let c = comps.count(d);
                    for i in 0..c {
                        f(comps.get(d, i), slice[i * c + i]);
                    }
                }
            }
        }
    }
}

/// Builds the coefficient table of the auxiliary polynomial by multiplying in
/// the `N` factors `1 + sum_{s,s'} a_u^(s) a_v^(s') u^(s)_x v^(s')_x` one at a
/// time, updating in place from the highest degree down.
pub fn build_aux_polynomial(v: &LowRankOperator) -> Result<DiagonalCoeffTable> {
    let k = v.rank();
    let n = v.dim();
    if k == 0 {
        return Ok(DiagonalCoeffTable {
            rank: 0,
            max_degree: n,
            storage: Storage::Dense { strides: Vec::new(), data: vec![ONE] },
        });
    }
    let dense_len = (n + 1).checked_pow(2 * k as u32);
    let use_dense = k <= 2 && dense_len.is_some_and(|len| len <= DENSE_MAX_ENTRIES);
    let mut table = if use_dense {
        DiagonalCoeffTable { rank: k, max_degree: n, storage: new_dense(k, n) }
    } else {
        let comps = Compositions::new(k, n);
        let total: usize = (0..=n).map(|d| comps.count(d).pow(2)).sum();
        if total > TABLE_MAX_ENTRIES {
            return Err(Error::GuardExceeded(format!(
                "auxiliary polynomial for N={n}, k={k} needs {total} coefficients (limit {TABLE_MAX_ENTRIES})"
            )));
        }
        let slices: Vec<Vec<Complex64>> = (0..=n).map(|d| vec![ZERO; comps.count(d).pow(2)]).collect();
        let mut table = DiagonalCoeffTable { rank: k, max_degree: n, storage: Storage::Sliced { comps, slices } };
        if let Storage::Sliced { slices, .. } = &mut table.storage {
            slices[0][0] = ONE;
        }
        table
    };

    let mut weights = vec![ZERO; k * k];
    for x in 0..n {
        for s in 0..k {
            for sp in 0..k {
                weights[s * k + sp] = v.u(s)[x] * v.v(sp)[x];
            }
        }
        // After multiplying in factor x, degrees up to x+1 can be populated.
        let top = (x + 1).min(n);
        match &mut table.storage {
            Storage::Dense { strides, data } => multiply_dense(k, top, strides, data, &weights),
            Storage::Sliced { comps, slices } => multiply_sliced(k, top, comps, slices, &weights),
        }
    }
    Ok(table)
}

fn new_dense(k: usize, n: usize) -> Storage {
    let axes = 2 * k;
    let extent = n + 1;
    let mut strides = vec![1usize; axes];
    for a in (0..axes - 1).rev() {
        strides[a] = strides[a + 1] * extent;
    }
    let mut data = vec![ZERO; strides[0] * extent];
    data[0] = ONE;
    Storage::Dense { strides, data }
}

/// One factor multiplication on the dense layout. Every entry of the
/// `[0, top]^(2k)` block is visited in descending linear order; entries with
/// mismatched total degrees are skipped.
fn multiply_dense(k: usize, top: usize, strides: &[usize], data: &mut [Complex64], weights: &[Complex64]) {
    let axes = 2 * k;
    let mut digits = vec![top; axes];
    let mut offset: usize = strides.iter().map(|s| s * top).sum();
    let mut deg_u = top * k;
    let mut deg_v = top * k;
    loop {
        if deg_u == deg_v && deg_u > 0 {
            let mut acc = ZERO;
            for s in 0..k {
                if digits[s] == 0 {
                    continue;
                }
                let base = offset - strides[s];
                for sp in 0..k {
                    if digits[k + sp] == 0 {
                        continue;
                    }
                    acc += weights[s * k + sp] * data[base - strides[k + sp]];
                }
            }
            data[offset] += acc;
        }
        // Descending odometer step, last axis fastest.
        let mut axis = axes;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if digits[axis] > 0 {
                digits[axis] -= 1;
                offset -= strides[axis];
                if axis < k {
                    deg_u -= 1;
                } else {
                    deg_v -= 1;
                }
                break;
            }
            digits[axis] = top;
            offset += top * strides[axis];
            if axis < k {
                deg_u += top;
            } else {
                deg_v += top;
            }
        }
    }
}

fn multiply_sliced(k: usize, top: usize, comps: &Compositions, slices: &mut [Vec<Complex64>], weights: &[Complex64]) {
    for d in (1..=top).rev() {
        let (lower, upper) = slices.split_at_mut(d);
        let src = &lower[d - 1];
        let dst = &mut upper[0];
        let c = comps.count(d);
        let cs = comps.count(d - 1);
        for i in 0..c {
            let down_i = comps.down(d, i);
            for j in 0..c {
                let down_j = comps.down(d, j);
                let mut acc = ZERO;
                for s in 0..k {
                    let Some(ri) = down_i[s] else { continue };
                    let row = &src[ri * cs..(ri + 1) * cs];
                    for sp in 0..k {
                        if let Some(cj) = down_j[sp] {
                            acc += weights[s * k + sp] * row[cj];
                        }
                    }
                }
                dst[i * c + j] += acc;
            }
        }
    }
}

/// Enumerates the compositions of each degree `d <= max` into `k` parts.
#[derive(Debug, Clone)]
struct Compositions {
    k: usize,
    /// `by_degree[d]` lists the compositions of `d`, flattened `k` at a time.
    by_degree: Vec<Vec<usize>>,
    /// `down[d][i*k + s]` is the index in degree `d-1` of composition `i`
    /// of degree `d` with part `s` decremented.
    down: Vec<Vec<Option<usize>>>,
}

impl Compositions {
    fn new(k: usize, max: usize) -> Self {
        let mut by_degree = Vec::with_capacity(max + 1);
        for d in 0..=max {
            let mut flat = Vec::new();
            let mut cur = vec![0usize; k];
            push_compositions(d, 0, &mut cur, &mut flat);
            by_degree.push(flat);
        }
        let mut comps = Compositions { k, by_degree, down: Vec::new() };
        let mut down = vec![Vec::new()];
        for d in 1..=max {
            let count = comps.count(d);
            let mut table = vec![None; count * k];
            for i in 0..count {
                let mut c = comps.get(d, i).to_vec();
                for s in 0..k {
                    if c[s] > 0 {
                        c[s] -= 1;
                        table[i * k + s] = comps.index_in(d - 1, &c);
                        c[s] += 1;
                    }
                }
            }
            down.push(table);
        }
        comps.down = down;
        comps
    }

    fn count(&self, d: usize) -> usize {
        self.by_degree[d].len() / self.k
    }

    fn get(&self, d: usize, i: usize) -> &[usize] {
        &self.by_degree[d][i * self.k..(i + 1) * self.k]
    }

    fn down(&self, d: usize, i: usize) -> &[Option<usize>] {
        &self.down[d][i * self.k..(i + 1) * self.k]
    }

    fn index_of(&self, c: &[usize]) -> Option<usize> {
        let d: usize = c.iter().sum();
        if d >= self.by_degree.len() {
            return None;
        }
        self.index_in(d, c)
    }

    /// Compositions are generated in lexicographic order, so binary search works.
    fn index_in(&self, d: usize, c: &[usize]) -> Option<usize> {
        let count = self.count(d);
        let (mut lo, mut hi) = (0, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(d, mid).cmp(c) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

fn push_compositions(remaining: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<usize>) {
    let k = cur.len();
    if pos == k - 1 {
        cur[pos] = remaining;
        out.extend_from_slice(cur);
        return;
    }
    for part in 0..=remaining {
        cur[pos] = part;
        push_compositions(remaining - part, pos + 1, cur, out);
    }
}

/// `Per(1 + V)` from the diagonal coefficients weighted by `prod_r n_r!`.
///
/// For `N > 170` the factorial weights overflow, so terms are accumulated as
/// `(ln|term|, phase)` pairs and summed relative to the largest magnitude.
pub fn permanent_lowrank(v: &LowRankOperator) -> Result<Complex64> {
    let table = build_aux_polynomial(v)?;
    let n = v.dim();
    if n <= MAX_DIRECT_FACTORIAL {
        let mut fact = vec![1.0f64; n + 1];
        for i in 1..=n {
            fact[i] = fact[i - 1] * i as f64;
        }
        let mut total = ZERO;
        table.for_each_diagonal(|deg, f| {
            total += f * deg.iter().map(|&d| fact[d]).product::<f64>();
        });
        return Ok(total);
    }
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut terms: Vec<(f64, Complex64)> = Vec::new();
    table.for_each_diagonal(|deg, f| {
        let mag = f.norm();
        if mag > 0.0 {
            let ln = mag.ln() + deg.iter().map(|&d| ln_fact[d]).sum::<f64>();
            terms.push((ln, f / mag));
        }
    });
    let Some(max_ln) = terms.iter().map(|t| t.0).reduce(f64::max) else {
        return Ok(ZERO);
    };
    let scaled: Complex64 = terms.iter().map(|(ln, phase)| phase * (ln - max_ln).exp()).sum();
    Ok(scaled * max_ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{lowrank_to_dense, ComplexMatrix};
    use crate::permanent::permanent_ryser;
    use crate::random::{random_lowrank, seeded};
    use std::collections::BTreeMap;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Independent expansion of the auxiliary polynomial with a sparse
    /// exponent-map representation: multiply out all `N` factors term by term.
    fn expand_by_brute_force(v: &LowRankOperator) -> BTreeMap<Vec<usize>, Complex64> {
        let k = v.rank();
        let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        poly.insert(vec![0; 2 * k], ONE);
        for x in 0..v.dim() {
            let mut next = poly.clone();
            for (exp, coef) in &poly {
                for s in 0..k {
                    for sp in 0..k {
                        let mut e = exp.clone();
                        e[s] += 1;
                        e[k + sp] += 1;
                        *next.entry(e).or_insert(ZERO) += coef * v.u(s)[x] * v.v(sp)[x];
                    }
                }
            }
            poly = next;
        }
        poly
    }

    fn ones_rank_one(n: usize) -> LowRankOperator {
        LowRankOperator::new(n, vec![vec![c(1.0); n]], vec![vec![c(1.0); n]]).unwrap()
    }

    #[test]
    fn single_factor_reads_off_product() {
        let (u1, v1) = (Complex64::new(0.5, 2.0), Complex64::new(-1.0, 0.25));
        let v = LowRankOperator::new(1, vec![vec![u1]], vec![vec![v1]]).unwrap();
        let t = build_aux_polynomial(&v).unwrap();
        assert_eq!(t.coeff(&[0], &[0]), ONE);
        assert_eq!(t.coeff(&[1], &[1]), u1 * v1);
    }

    #[test]
    fn two_factor_all_ones() {
        // (1 + a_u a_v)^2 = 1 + 2 a_u a_v + a_u^2 a_v^2
        let t = build_aux_polynomial(&ones_rank_one(2)).unwrap();
        assert_eq!(t.coeff(&[0], &[0]), c(1.0));
        assert_eq!(t.coeff(&[1], &[1]), c(2.0));
        assert_eq!(t.coeff(&[2], &[2]), c(1.0));
        let brute = expand_by_brute_force(&ones_rank_one(2));
        assert_eq!(brute[&vec![1, 1]], c(2.0));
        assert_eq!(permanent_lowrank(&ones_rank_one(2)).unwrap(), c(5.0));
    }

    #[test]
    fn rank_zero_is_single_coefficient() {
        let t = build_aux_polynomial(&LowRankOperator::zero(4)).unwrap();
        assert_eq!(t.stored_len(), 1);
        let mut seen = Vec::new();
        t.for_each_diagonal(|n, f| seen.push((n.to_vec(), f)));
        assert_eq!(seen, vec![(vec![], ONE)]);
        assert_eq!(permanent_lowrank(&LowRankOperator::zero(7)).unwrap(), ONE);
    }

    #[test]
    fn table_matches_brute_force_expansion() {
        let mut rng = seeded(77);
        for &(n, k) in &[(3, 1), (4, 2), (3, 3), (5, 2)] {
            let v = random_lowrank(&mut rng, n, k);
            let table = build_aux_polynomial(&v).unwrap();
            let brute = expand_by_brute_force(&v);
            for (exp, want) in &brute {
                let got = table.coeff(&exp[..k], &exp[k..]);
                assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()), "n={n} k={k} {exp:?}");
            }
        }
    }

    #[test]
    fn off_shell_coefficients_are_exact_zeros() {
        let v = random_lowrank(&mut seeded(5), 5, 2);
        let t = build_aux_polynomial(&v).unwrap();
        assert_eq!(t.layout(), TableLayout::Dense);
        for a in 0..=5 {
            for b in 0..=5 {
                for cc in 0..=5 {
                    for d in 0..=5 {
                        if a + b != cc + d {
                            let f = t.coeff(&[a, b], &[cc, d]);
                            assert_eq!(f.re.to_bits(), 0);
                            assert_eq!(f.im.to_bits(), 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sliced_and_dense_layouts_agree() {
        let v = random_lowrank(&mut seeded(8), 6, 2);
        let dense = build_aux_polynomial(&v).unwrap();
        let comps = Compositions::new(2, 6);
        let mut slices: Vec<Vec<Complex64>> = (0..=6).map(|d| vec![ZERO; comps.count(d).pow(2)]).collect();
        slices[0][0] = ONE;
        let mut w = vec![ZERO; 4];
        for x in 0..6 {
            for s in 0..2 {
                for sp in 0..2 {
                    w[s * 2 + sp] = v.u(s)[x] * v.v(sp)[x];
                }
            }
            multiply_sliced(2, x + 1, &comps, &mut slices, &w);
        }
        let sliced = DiagonalCoeffTable { rank: 2, max_degree: 6, storage: Storage::Sliced { comps, slices } };
        for a in 0..=6 {
            for b in 0..=6 - a {
                for cc in 0..=6 {
                    let d = a + b;
                    if cc > d {
                        continue;
                    }
                    let (x, y) = (dense.coeff(&[a, b], &[cc, d - cc]), sliced.coeff(&[a, b], &[cc, d - cc]));
                    assert!((x - y).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn random_rank_two_matches_ryser() {
        let v = random_lowrank(&mut seeded(2024), 8, 2);
        let dense = ComplexMatrix::identity(8).add(&lowrank_to_dense(&v)).unwrap();
        let want = permanent_ryser(&dense).unwrap();
        let got = permanent_lowrank(&v).unwrap();
        assert!((got - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn compositions_are_sorted_and_complete() {
        let comps = Compositions::new(3, 4);
        assert_eq!(comps.count(4), 15); // C(6, 2)
        assert_eq!(comps.index_of(&[0, 0, 4]), Some(0));
        assert_eq!(comps.index_of(&[4, 0, 0]), Some(14));
        assert_eq!(comps.down(1, comps.index_of(&[0, 1, 0]).unwrap()), &[None, Some(0), None]);
    }

    #[test]
    fn log_domain_contraction_for_large_n() {
        // Rank one with u = v = 1/sqrt(N)-scaled ones: Per(1 + J/N) has the
        // closed form sum_d C(N,d) N^-d d! which the log-domain path must match.
        let n = 200;
        let s = (1.0 / n as f64).sqrt();
        let v = LowRankOperator::new(n, vec![vec![c(s); n]], vec![vec![c(s); n]]).unwrap();
        let got = permanent_lowrank(&v).unwrap();
        let mut want = 0.0;
        let mut term = 1.0; // C(N,d) d! / N^d = prod_{i<d} (N-i)/N
        for d in 0..=n {
            want += term;
            term *= (n - d) as f64 / n as f64;
        }
        assert!((got.re - want).abs() <= 1e-10 * want && got.im.abs() < 1e-10 * want);
    }
}
