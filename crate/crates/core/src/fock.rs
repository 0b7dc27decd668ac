//! Brute-force Fock-space simulator.
//!
//! States are sparse maps from occupation configurations to amplitudes. A
//! fermionic configuration `(n_0, ..., n_{M-1})` stands for
//! `f+_{j_1} ... f+_{j_P} |vac>` with `j_1 < ... < j_P`; a bosonic one for
//! `prod_j (b+_j)^{n_j} / sqrt(n_j!) |vac>`. Non-interacting operators act on
//! each particle-number sector separately, with matrix elements
//!
//! ```text
//! bosons:   <m|U^|n> = Per U[m|n] / sqrt(prod m_i! prod n_j!)
//! fermions: <m|U^|n> = det U[m|n]
//! ```
//!
//! where `U[m|n]` repeats row `i` `m_i` times and column `j` `n_j` times.
//! Everything here is exponential in the particle number and guarded
//! accordingly; it exists to check the fast paths.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::format::Sig17;
use crate::numerics::{determinant, ComplexMatrix, ONE, ZERO};
use crate::permanent::permanent_submatrix;
use crate::{Error, Result};

/// Largest particle number the simulator will act on.
pub const MAX_PARTICLES: usize = 12;
/// Largest number of modes the simulator will act on.
pub const MAX_MODES: usize = 24;
/// Largest number of configurations enumerated in one sector.
pub const MAX_SECTOR_CONFIGS: usize = 2_000_000;
/// Particle-number limit of the direct tuple-expansion route.
pub const DIRECT_MAX_PARTICLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Boson,
    Fermion,
}

/// Occupation counts per mode.
pub type Occupation = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    flavor: Flavor,
    modes: usize,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockVector {
    pub fn zero(flavor: Flavor, modes: usize) -> Self {
        FockVector { flavor, modes, amps: BTreeMap::new() }
    }

    pub fn vacuum(flavor: Flavor, modes: usize) -> Self {
        let mut v = Self::zero(flavor, modes);
        v.amps.insert(vec![0; modes], ONE);
        v
    }

    pub fn basis(flavor: Flavor, occ: Occupation) -> Result<Self> {
        let mut v = Self::zero(flavor, occ.len());
        v.add_amplitude(occ, ONE)?;
        Ok(v)
    }

    pub fn from_amplitudes(
        flavor: Flavor,
        modes: usize,
        amps: impl IntoIterator<Item = (Occupation, Complex64)>,
    ) -> Result<Self> {
        let mut v = Self::zero(flavor, modes);
        for (occ, a) in amps {
            v.add_amplitude(occ, a)?;
        }
        Ok(v)
    }

    /// Adds `amp` to the amplitude of `occ`, validating the configuration.
    pub fn add_amplitude(&mut self, occ: Occupation, amp: Complex64) -> Result<()> {
        if occ.len() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "configuration over {} modes in a {}-mode space",
                occ.len(),
                self.modes
            )));
        }
        if self.flavor == Flavor::Fermion && occ.iter().any(|&n| n > 1) {
            return Err(Error::InvalidInput(format!("fermionic occupation {occ:?} exceeds 1")));
        }
        if !amp.re.is_finite() || !amp.im.is_finite() {
            return Err(Error::InvalidInput("amplitudes must be finite".into()));
        }
        *self.amps.entry(occ).or_insert(ZERO) += amp;
        Ok(())
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.amps.get(occ).copied().unwrap_or(ZERO)
    }

    /// Configurations in lexicographic order with their amplitudes.
    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sqr: self.norm_sqr() })
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let amps = self.amps.iter().map(|(o, a)| (o.clone(), a * s)).collect();
        FockVector { flavor: self.flavor, modes: self.modes, amps }
    }

    /// Distinct total particle numbers present.
    pub fn particle_numbers(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.amps.keys().map(|o| total(o)).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// Removes exact zeros.
    fn pruned(mut self) -> Self {
        self.amps.retain(|_, a| *a != ZERO);
        self
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch(format!("{:?} vs {:?}", self.flavor, other.flavor)));
        }
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch(format!("{} vs {} modes", self.modes, other.modes)));
        }
        Ok(())
    }
}

fn total(occ: &[u8]) -> usize {
    occ.iter().map(|&n| n as usize).sum()
}

/// Mode index list with multiplicities, ascending.
fn expand_modes(occ: &[u8]) -> Vec<usize> {
    occ.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize)).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Number of configurations with `particles` particles in `modes` modes.
pub fn sector_size(flavor: Flavor, modes: usize, particles: usize) -> usize {
    match flavor {
        Flavor::Fermion => binomial(modes, particles),
        Flavor::Boson if modes == 0 => usize::from(particles == 0),
        Flavor::Boson => binomial(modes + particles - 1, particles),
    }
}

/// All configurations of a sector, in lexicographic order.
pub fn sector_configs(flavor: Flavor, modes: usize, particles: usize) -> Result<Vec<Occupation>> {
    let size = sector_size(flavor, modes, particles);
    if size > MAX_SECTOR_CONFIGS {
        return Err(Error::GuardExceeded(format!(
            "{size} configurations for {particles} particles in {modes} modes (limit {MAX_SECTOR_CONFIGS})"
        )));
    }
    let cap = match flavor {
        Flavor::Fermion => 1,
        Flavor::Boson => particles,
    };
    let mut out = Vec::with_capacity(size);
    let mut cur = vec![0u8; modes];
    fill_configs(0, particles, cap, &mut cur, &mut out);
    Ok(out)
}

fn fill_configs(pos: usize, remaining: usize, cap: usize, cur: &mut Vec<u8>, out: &mut Vec<Occupation>) {
    if pos == cur.len() {
        if remaining == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for n in 0..=remaining.min(cap) {
        cur[pos] = n as u8;
        fill_configs(pos + 1, remaining - n, cap, cur, out);
    }
    cur[pos] = 0;
}

fn check_operator(u: &ComplexMatrix, state: &FockVector) -> Result<()> {
    let m = u.require_square()?;
    if m != state.modes {
        return Err(Error::DimensionMismatch(format!("{m}x{m} operator on {} modes", state.modes)));
    }
    if m > MAX_MODES {
        return Err(Error::GuardExceeded(format!("{m} modes (limit {MAX_MODES})")));
    }
    if let Some(&p) = state.particle_numbers().last() {
        if p > MAX_PARTICLES {
            return Err(Error::GuardExceeded(format!("{p} particles (limit {MAX_PARTICLES})")));
        }
    }
    Ok(())
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// `<out|U^|inp>` for two configurations in the same sector.
fn basis_element(flavor: Flavor, u: &ComplexMatrix, out: &[u8], inp: &[u8]) -> Result<Complex64> {
    match flavor {
        Flavor::Fermion => determinant(&u.select(&expand_modes(out), &expand_modes(inp))),
        Flavor::Boson => {
            let rows: Vec<usize> = out.iter().map(|&n| n as usize).collect();
            let cols: Vec<usize> = inp.iter().map(|&n| n as usize).collect();
            let per = permanent_submatrix(u, &rows, &cols)?;
            let norm: f64 = out.iter().chain(inp).map(|&n| factorial(n)).product();
            Ok(per / norm.sqrt())
        }
    }
}

/// The non-interacting operator `U^` applied to `state`, sector by sector.
pub fn apply_noninteracting(u: &ComplexMatrix, state: &FockVector) -> Result<FockVector> {
    check_operator(u, state)?;
    let mut out = FockVector::zero(state.flavor, state.modes);
    for p in state.particle_numbers() {
        let inputs: Vec<(&Occupation, &Complex64)> = state.amps.iter().filter(|(o, _)| total(o) == p).collect();
        for m in sector_configs(state.flavor, state.modes, p)? {
            let mut acc = ZERO;
            for (n, a) in &inputs {
                acc += basis_element(state.flavor, u, &m, n)? * **a;
            }
            if acc != ZERO {
                out.amps.insert(m, acc);
            }
        }
    }
    Ok(out)
}

/// Second route to [`apply_noninteracting`] that expands each creation
/// string term by term, `a+_{j_1}..a+_{j_P} -> sum_i U_{i_1 j_1}..U_{i_P j_P}
/// a+_{i_1}..a+_{i_P}`, and reorders the result. Limited to
/// [`DIRECT_MAX_PARTICLES`] particles.
pub fn apply_noninteracting_direct(u: &ComplexMatrix, state: &FockVector) -> Result<FockVector> {
    check_operator(u, state)?;
    if let Some(&p) = state.particle_numbers().last() {
        if p > DIRECT_MAX_PARTICLES {
            return Err(Error::GuardExceeded(format!(
                "direct expansion limited to {DIRECT_MAX_PARTICLES} particles, got {p}"
            )));
        }
    }
    let m = state.modes;
    let mut out = FockVector::zero(state.flavor, m);
    for (occ, &amp) in &state.amps {
        let cols = expand_modes(occ);
        let p = cols.len();
        let in_norm: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
        let mut rows = vec![0usize; p];
        loop {
            let coef: Complex64 = rows.iter().zip(&cols).map(|(&i, &j)| u[(i, j)]).product();
            let mut target = vec![0u8; m];
            for &i in &rows {
                target[i] += 1;
            }
            let weight = match state.flavor {
                Flavor::Boson => {
                    let out_norm: f64 = target.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
                    Some(out_norm / in_norm)
                }
                Flavor::Fermion => sort_sign(&rows),
            };
            if let Some(w) = weight {
                *out.amps.entry(target).or_insert(ZERO) += coef * amp * w;
            }
            if !next_tuple(&mut rows, m) {
                break;
            }
        }
    }
    Ok(out.pruned())
}

/// Odometer over `[0, m)^len`; false once it wraps around.
fn next_tuple(idx: &mut [usize], m: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < m {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// Sign of the permutation sorting `idx` ascending, or `None` on a repeat.
fn sort_sign(idx: &[usize]) -> Option<f64> {
    let mut inversions = 0usize;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            match idx[a].cmp(&idx[b]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(if inversions.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// `<bra|U^|ket>` evaluated only over the support of `bra`.
pub fn matrix_element(bra: &FockVector, u: &ComplexMatrix, ket: &FockVector) -> Result<Complex64> {
    bra.check_compatible(ket)?;
    check_operator(u, ket)?;
    let mut acc = ZERO;
    for (m, b) in &bra.amps {
        let p = total(m);
        for (n, a) in ket.amps.iter().filter(|(n, _)| total(n) == p) {
            acc += b.conj() * basis_element(ket.flavor, u, m, n)? * a;
        }
    }
    Ok(acc)
}

/// `<a|b>`
pub fn inner(a: &FockVector, b: &FockVector) -> Result<Complex64> {
    a.check_compatible(b)?;
    let (small, large, conj_small) = if a.len() <= b.len() { (a, b, true) } else { (b, a, false) };
    let mut acc = ZERO;
    for (occ, x) in &small.amps {
        if let Some(y) = large.amps.get(occ) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    Ok(acc)
}

/// `a (x) b` with `b`'s modes placed after `a`'s. Creation strings are
/// concatenated in factor order, which is already ascending in the global
/// mode order, so no fermionic sign arises.
pub fn tensor_product(a: &FockVector, b: &FockVector) -> Result<FockVector> {
    if a.flavor != b.flavor {
        return Err(Error::FlavorMismatch(format!("{:?} (x) {:?}", a.flavor, b.flavor)));
    }
    let mut out = FockVector::zero(a.flavor, a.modes + b.modes);
    for (oa, x) in &a.amps {
        for (ob, y) in &b.amps {
            let mut occ = Vec::with_capacity(a.modes + b.modes);
            occ.extend_from_slice(oa);
            occ.extend_from_slice(ob);
            out.amps.insert(occ, x * y);
        }
    }
    Ok(out)
}

/// Multiplies each amplitude by `z^(n_mode)`, with `0^0 = 1`.
pub fn project_number_op(state: &FockVector, mode: usize, z: Complex64) -> Result<FockVector> {
    if mode >= state.modes {
        return Err(Error::InvalidInput(format!("mode {mode} out of range for {} modes", state.modes)));
    }
    let amps = state.amps.iter().map(|(o, a)| (o.clone(), a * z.powu(o[mode] as u32))).collect();
    Ok(FockVector { flavor: state.flavor, modes: state.modes, amps }.pruned())
}

/// Applies `sum_j w_j c+_j` to `state`.
pub fn create(state: &FockVector, w: &[Complex64]) -> Result<FockVector> {
    ladder(state, w, true)
}

/// Applies `sum_j w_j c_j` to `state` (coefficients are not conjugated).
pub fn annihilate(state: &FockVector, w: &[Complex64]) -> Result<FockVector> {
    ladder(state, w, false)
}

fn ladder(state: &FockVector, w: &[Complex64], raising: bool) -> Result<FockVector> {
    if w.len() != state.modes {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} modes", w.len(), state.modes)));
    }
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, &a) in &state.amps {
        let mut parity_before = 0u32;
        for (j, &wj) in w.iter().enumerate() {
            let n = occ[j];
            if wj != ZERO {
                let factor = match (state.flavor, raising) {
                    (Flavor::Fermion, true) if n == 0 => Some(if parity_before.is_multiple_of(2) { 1.0 } else { -1.0 }),
                    (Flavor::Fermion, false) if n == 1 => Some(if parity_before.is_multiple_of(2) { 1.0 } else { -1.0 }),
                    (Flavor::Boson, true) => Some(f64::from(n + 1).sqrt()),
                    (Flavor::Boson, false) if n > 0 => Some(f64::from(n).sqrt()),
                    _ => None,
                };
                if let Some(f) = factor {
                    let mut target = occ.clone();
                    if raising {
                        target[j] += 1;
                    } else {
                        target[j] -= 1;
                    }
                    *out.entry(target).or_insert(ZERO) += a * wj * f;
                }
            }
            parity_before += u32::from(n);
        }
    }
    Ok(FockVector { flavor: state.flavor, modes: state.modes, amps: out }.pruned())
}

/// `phi+_1 ... phi+_k |vac>` for orbitals `phi_a` over `modes` fermionic modes.
/// The amplitude on the configuration occupying `s_1 < ... < s_k` is
/// `det[phi_a(s_b)]`.
pub fn slater(orbitals: &[Vec<Complex64>], modes: usize) -> Result<FockVector> {
    if let Some(bad) = orbitals.iter().find(|o| o.len() != modes) {
        return Err(Error::DimensionMismatch(format!("orbital of length {} over {modes} modes", bad.len())));
    }
    let k = orbitals.len();
    let mut out = FockVector::zero(Flavor::Fermion, modes);
    for occ in sector_configs(Flavor::Fermion, modes, k)? {
        let sites = expand_modes(&occ);
        let m = ComplexMatrix::from_fn(k, k, |b, a| orbitals[a][sites[b]]);
        let amp = determinant(&m)?;
        if amp != ZERO {
            out.amps.insert(occ, amp);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
pub(crate) struct AmpJson {
    pub occ: Vec<u8>,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize)]
pub(crate) struct AmpOut<'a> {
    pub occ: &'a [u8],
    pub re: Sig17,
    pub im: Sig17,
}

#[derive(Deserialize)]
struct FockJson {
    flavor: Flavor,
    modes: usize,
    amps: Vec<AmpJson>,
}

#[derive(Serialize)]
struct FockOut<'a> {
    flavor: Flavor,
    modes: usize,
    amps: Vec<AmpOut<'a>>,
}

pub(crate) fn amps_out(amps: &BTreeMap<Occupation, Complex64>) -> Vec<AmpOut<'_>> {
    amps.iter().map(|(occ, a)| AmpOut { occ, re: Sig17(a.re), im: Sig17(a.im) }).collect()
}

impl FockVector {
    /// `{"flavor": "boson"|"fermion", "modes": M, "amps": [{"occ": [..], "re": x, "im": y}, ..]}`
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FockJson = serde_json::from_str(text)?;
        Self::from_amplitudes(
            raw.flavor,
            raw.modes,
            raw.amps.into_iter().map(|a| (a.occ, Complex64::new(a.re, a.im))),
        )
    }

    pub fn to_json(&self) -> String {
        let out = FockOut { flavor: self.flavor, modes: self.modes, amps: amps_out(&self.amps) };
        serde_json::to_string(&out).expect("state serializes")
    }
}
