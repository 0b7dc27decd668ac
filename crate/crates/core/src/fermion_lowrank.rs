//! `<Phi|U^|Phi>` for fermionic product states when `U = 1 + V` and `V` has
//! small rank `k`.
//!
//! With `V = sum_s u_s v_s^T`, the many-body operator expands over subsets
//! `S = {s_1 < ... < s_r}` of the rank labels as
//!
//! ```text
//! U^ = sum_S u+_{s_1} ... u+_{s_r} v_{s_r} ... v_{s_1},
//! u+_s = sum_x u_s[x] f+_x,   v_s = sum_x v_s[x] f_x.
//! ```
//!
//! Each ladder operator splits into a sum of pieces acting on single factors.
//! Distributing the `2r` operators of a word over the `N` factors in all
//! `N^(2r)` ways, every term is a product of small local expectation values
//! times a sign from regrouping the pieces by factor.
//!
//! Sign rule: bring the pieces into factor order with a stable sort, picking
//! up `-1` per transposition (pieces on different factors anticommute). The
//! group for factor `f` then has to move past the creation strings of factors
//! `j < f`, contributing `(-1)^(len_f * sum_{j<f} parity_j)`. A local
//! expectation in a definite-parity factor vanishes unless `len_f` is even, so
//! on every nonzero term the second contribution is `+1`.

use num_complex::Complex64;

use crate::exec::ExecConfig;
use crate::fock::{self, Flavor, FockVector};
use crate::numerics::{LowRankOperator, ONE, ZERO};
use crate::states::{FactorState, Parity, ProductState};
use crate::{Error, Result};

/// Largest number of local modes per factor.
pub const MAX_LOCAL_MODES: usize = 24;
/// Largest rank accepted; words have up to `2k` operators.
pub const MAX_RANK: usize = 8;
/// Cap on `N^(2k)` assignment count.
pub const MAX_ASSIGNMENTS: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// `sum_j coeffs[j] c+_j` or `sum_j coeffs[j] c_j` on one factor.
#[derive(Debug, Clone, Copy)]
pub struct LocalOp<'a> {
    pub kind: LadderKind,
    pub coeffs: &'a [Complex64],
}

/// Splits a global mode vector into one slice per factor.
pub fn split_vector<'a>(w: &'a [Complex64], state: &ProductState) -> Result<Vec<&'a [Complex64]>> {
    let offsets = state.mode_offsets();
    let total = *offsets.last().expect("offsets end with the total");
    if w.len() != total {
        return Err(Error::DimensionMismatch(format!("vector of length {} for {total} modes", w.len())));
    }
    Ok(offsets.windows(2).map(|b| &w[b[0]..b[1]]).collect())
}

/// `<Psi|ops[0] ops[1] ... |Psi>` with the operators applied right to left.
pub fn local_word_expectation(factor: &FactorState, ops: &[LocalOp<'_>]) -> Result<Complex64> {
    let modes = factor.local_modes();
    if modes > MAX_LOCAL_MODES {
        return Err(Error::GuardExceeded(format!("{modes} local modes (limit {MAX_LOCAL_MODES})")));
    }
    let psi = factor.amplitudes();
    let mut cur: Option<FockVector> = None;
    for op in ops.iter().rev() {
        let src = cur.as_ref().unwrap_or(psi);
        let next = match op.kind {
            LadderKind::Create => fock::create(src, op.coeffs)?,
            LadderKind::Annihilate => fock::annihilate(src, op.coeffs)?,
        };
        if next.is_empty() {
            return Ok(ZERO);
        }
        cur = Some(next);
    }
    fock::inner(psi, cur.as_ref().unwrap_or(psi))
}

/// Sign of regrouping the pieces of a word by factor: `(-1)^inversions`.
pub fn crossing_sign(assignment: &[usize]) -> f64 {
    let mut odd = false;
    for a in 0..assignment.len() {
        for b in a + 1..assignment.len() {
            if assignment[a] > assignment[b] {
                odd = !odd;
            }
        }
    }
    if odd {
        -1.0
    } else {
        1.0
    }
}

fn validate(state: &ProductState, v: &LowRankOperator) -> Result<()> {
    if state.flavor() != Flavor::Fermion {
        return Err(Error::FlavorMismatch("the finite-rank expansion needs a fermionic state".into()));
    }
    if v.dim() != state.total_modes() {
        return Err(Error::DimensionMismatch(format!(
            "rank operator on {} modes for a state on {} modes",
            v.dim(),
            state.total_modes()
        )));
    }
    if let Some(i) = state.factors().iter().position(|f| f.parity() == Parity::Indefinite) {
        return Err(Error::IndefiniteParity { factor: i });
    }
    if let Some(f) = state.factors().iter().find(|f| f.local_modes() > MAX_LOCAL_MODES) {
        return Err(Error::GuardExceeded(format!("{} local modes (limit {MAX_LOCAL_MODES})", f.local_modes())));
    }
    let k = v.rank();
    if k > MAX_RANK {
        return Err(Error::GuardExceeded(format!("rank {k} (limit {MAX_RANK})")));
    }
    let assignments = (state.factors().len() as f64).powi(2 * k as i32);
    if assignments > MAX_ASSIGNMENTS {
        return Err(Error::GuardExceeded(format!("{assignments:e} factor assignments")));
    }
    Ok(())
}

/// `<Phi|U^|Phi>` for `U = 1 + V`, evaluated sequentially.
pub fn expectation_lowrank(state: &ProductState, v: &LowRankOperator) -> Result<Complex64> {
    expectation_lowrank_with(state, v, &ExecConfig::default())
}

/// As [`expectation_lowrank`], with the assignment sum spread over `exec`.
pub fn expectation_lowrank_with(state: &ProductState, v: &LowRankOperator, exec: &ExecConfig) -> Result<Complex64> {
    validate(state, v)?;
    let k = v.rank();
    let mut total = ONE;
    for word in 1u32..(1 << k) {
        let labels: Vec<usize> = (0..k).filter(|s| word & (1 << s) != 0).collect();
        total += word_contribution(state, v, &labels, exec)?;
    }
    Ok(total)
}

/// Largest correlation tensor `n^len` precomputed per distinct factor state;
/// bigger sub-words are evaluated directly on each factor.
const MAX_TENSOR_ENTRIES: usize = 4096;

/// `T[j_1..j_L] = <Psi| c_{j_1} ... c_{j_L} |Psi>` for a fixed sequence of
/// ladder kinds, flattened with `j_L` fastest.
fn correlation_tensor(factor: &FactorState, kinds: &[LadderKind]) -> Result<Vec<Complex64>> {
    let n = factor.local_modes();
    let basis: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();
    let entries = n.pow(kinds.len() as u32);
    let mut out = Vec::with_capacity(entries);
    let mut idx = vec![0usize; kinds.len()];
    for _ in 0..entries {
        let ops: Vec<LocalOp<'_>> = kinds.iter().zip(&idx).map(|(&kind, &j)| LocalOp { kind, coeffs: &basis[j] }).collect();
        out.push(local_word_expectation(factor, &ops)?);
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// `sum_j T[j_1..j_L] prod_a w_a[j_a]`, contracting the last axis first.
fn contract(tensor: &[Complex64], coeffs: &[&[Complex64]], n: usize) -> Complex64 {
    let mut cur: Vec<Complex64> = tensor.to_vec();
    for w in coeffs.iter().rev() {
        cur = cur.chunks_exact(n).map(|row| row.iter().zip(w.iter()).map(|(t, x)| t * x).sum()).collect();
    }
    cur[0]
}

/// Local expectation values of every sub-word on every factor, indexed
/// `[factor * 2^len + mask]`, where bit `a` of `mask` selects position `a`.
fn word_memo(
    state: &ProductState,
    ops: &[(LadderKind, &[Complex64])],
    exec: &ExecConfig,
) -> Result<Vec<Complex64>> {
    let len = ops.len();
    let masks = 1usize << len;
    let offsets = state.mode_offsets();
    let factors = state.factors();

    // Identical factors share their correlation tensors.
    let mut reps: Vec<usize> = Vec::new();
    let rep_of: Vec<usize> = factors
        .iter()
        .map(|f| match reps.iter().position(|&r| factors[r] == *f) {
            Some(i) => i,
            None => {
                reps.push(factors.iter().position(|g| g == f).expect("factor is present"));
                reps.len() - 1
            }
        })
        .collect();

    let balanced = |factor: &FactorState, mask: usize| {
        let creates = (0..len).filter(|&a| mask & (1 << a) != 0 && ops[a].0 == LadderKind::Create).count();
        let size = mask.count_ones() as usize;
        match factor.particle_number() {
            Some(_) => 2 * creates == size,
            None => size.is_multiple_of(2),
        }
    };
    let positions = |mask: usize| (0..len).filter(move |&a| mask & (1 << a) != 0);

    let mut tensors: Vec<Vec<Option<Vec<Complex64>>>> = Vec::with_capacity(reps.len());
    for &r in &reps {
        let f = &factors[r];
        let mut per_mask = vec![None; masks];
        for (mask, slot) in per_mask.iter_mut().enumerate() {
            let size = mask.count_ones();
            if mask == 0 || !balanced(f, mask) || f.local_modes().checked_pow(size).is_none_or(|e| e > MAX_TENSOR_ENTRIES) {
                continue;
            }
            let kinds: Vec<LadderKind> = positions(mask).map(|a| ops[a].0).collect();
            *slot = Some(correlation_tensor(f, &kinds)?);
        }
        tensors.push(per_mask);
    }

    let per_factor: Vec<Result<Vec<Complex64>>> = exec.map(factors.len(), |f| {
        let factor = &factors[f];
        let (lo, hi) = (offsets[f], offsets[f + 1]);
        let mut out = vec![ZERO; masks];
        for (mask, slot) in out.iter_mut().enumerate() {
            if !balanced(factor, mask) {
                continue;
            }
            if mask == 0 {
                // Factors are normalized.
                *slot = ONE;
                continue;
            }
            *slot = match &tensors[rep_of[f]][mask] {
                Some(t) => {
                    let coeffs: Vec<&[Complex64]> = positions(mask).map(|a| &ops[a].1[lo..hi]).collect();
                    contract(t, &coeffs, hi - lo)
                }
                None => {
                    let local: Vec<LocalOp<'_>> =
                        positions(mask).map(|a| LocalOp { kind: ops[a].0, coeffs: &ops[a].1[lo..hi] }).collect();
                    local_word_expectation(factor, &local)?
                }
            };
        }
        Ok(out)
    });
    let mut memo = Vec::with_capacity(factors.len() * masks);
    for part in per_factor {
        memo.extend(part?);
    }
    Ok(memo)
}

fn word_contribution(state: &ProductState, v: &LowRankOperator, labels: &[usize], exec: &ExecConfig) -> Result<Complex64> {
    let r = labels.len();
    let len = 2 * r;
    let mut ops: Vec<(LadderKind, &[Complex64])> = Vec::with_capacity(len);
    for &s in labels {
        ops.push((LadderKind::Create, v.u(s)));
    }
    for &s in labels.iter().rev() {
        ops.push((LadderKind::Annihilate, v.v(s)));
    }
    let memo = word_memo(state, &ops, exec)?;
    let n = state.factors().len();
    let masks = 1usize << len;

    let sum = exec.sum(n, |first| {
        let mut assignment = vec![0usize; len];
        assignment[0] = first;
        let mut acc = ZERO;
        loop {
            acc += assignment_term(&assignment, &memo, masks);
            // odometer over positions 1..len
            let mut pos = len;
            loop {
                pos -= 1;
                if pos == 0 {
                    return acc;
                }
                assignment[pos] += 1;
                if assignment[pos] < n {
                    break;
                }
                assignment[pos] = 0;
            }
        }
    });
    Ok(sum)
}

fn assignment_term(assignment: &[usize], memo: &[Complex64], masks: usize) -> Complex64 {
    let mut value = ONE;
    let mut seen = 0usize;
    for a in 0..assignment.len() {
        if seen & (1 << a) != 0 {
            continue;
        }
        let f = assignment[a];
        let mut mask = 0usize;
        for (b, &g) in assignment.iter().enumerate().skip(a) {
            if g == f {
                mask |= 1 << b;
            }
        }
        seen |= mask;
        let local = memo[f * masks + mask];
        if local == ZERO {
            return ZERO;
        }
        value *= local;
    }
    value * crossing_sign(assignment)
}
