//! Full counting statistics.
//!
//! For evolution `U0` and counting multipliers `z_m = e^{i lambda_m}` the
//! generating function is `chi = <Phi|U^|Phi>` with `U = U0^{-1} D U0` and
//! `D = diag(z)`, uncounted modes having `z = 1`. `U - 1 = U0^{-1}(D - 1)U0`
//! has rank equal to the number of counted modes with `z != 1`, which is what
//! makes the low-rank paths applicable. `z = 0` projects onto empty modes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exec::ExecConfig;
use crate::fermion_lowrank::expectation_lowrank_with;
use crate::fock::{matrix_element, Flavor};
use crate::format::{format_sig, Sig17};
use crate::numerics::{mat_mul, ComplexMatrix, LowRankOperator, Lu, MatrixJson, ONE, ZERO};
use crate::permanent::permanent_lowrank;
use crate::random::seeded;
use crate::states::{expand_product, ProductState};
use crate::{Error, Result};

/// `U0` is rejected when `||U0||_1 ||U0^{-1}||_1` reaches this.
pub const MAX_CONDITION: f64 = 1e12;
/// Largest number of modes in a probability grid.
pub const MAX_GRID_MODES: usize = 8;
/// Largest number of grid points (evaluations of chi).
pub const MAX_GRID_POINTS: usize = 1 << 16;
/// Slightly negative probabilities above this are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountedMode {
    pub mode: usize,
    pub z: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingSpec {
    u0: ComplexMatrix,
    counted: Vec<CountedMode>,
}

impl CountingSpec {
    pub fn new(u0: ComplexMatrix, counted: Vec<CountedMode>) -> Result<Self> {
        let n = u0.require_square()?;
        for (i, c) in counted.iter().enumerate() {
            if c.mode >= n {
                return Err(Error::InvalidInput(format!("counted mode {} out of range for {n} modes", c.mode)));
            }
            if counted[..i].iter().any(|d| d.mode == c.mode) {
                return Err(Error::InvalidInput(format!("mode {} counted twice", c.mode)));
            }
            if !c.z.re.is_finite() || !c.z.im.is_finite() {
                return Err(Error::InvalidInput("multipliers must be finite".into()));
            }
        }
        Ok(CountingSpec { u0, counted })
    }

    pub fn u0(&self) -> &ComplexMatrix {
        &self.u0
    }

    pub fn counted(&self) -> &[CountedMode] {
        &self.counted
    }

    pub fn dim(&self) -> usize {
        self.u0.rows()
    }

    /// The same `U0` with `modes` set to the multipliers `zs`, added if absent.
    pub fn with_multipliers(&self, modes: &[usize], zs: &[Complex64]) -> Result<Self> {
        let mut counted = self.counted.clone();
        for (&mode, &z) in modes.iter().zip(zs) {
            match counted.iter_mut().find(|c| c.mode == mode) {
                Some(c) => c.z = z,
                None => counted.push(CountedMode { mode, z }),
            }
        }
        Self::new(self.u0.clone(), counted)
    }
}

/// `U0^{-1}`, rejecting singular or badly conditioned input.
fn checked_inverse(u0: &ComplexMatrix) -> Result<ComplexMatrix> {
    let inv = Lu::new(u0)?.inverse()?;
    let condition = u0.norm_one() * inv.norm_one();
    if !condition.is_finite() || condition >= MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    Ok(inv)
}

/// `U0^{-1} D U0`.
pub fn build_fcs_operator(spec: &CountingSpec) -> Result<ComplexMatrix> {
    let inv = checked_inverse(&spec.u0)?;
    let mut diag = vec![ONE; spec.dim()];
    for c in &spec.counted {
        diag[c.mode] = c.z;
    }
    mat_mul(&inv, &mat_mul(&ComplexMatrix::from_diagonal(&diag), &spec.u0)?)
}

/// `U0^{-1}(D - 1)U0` as a sum of rank-one terms, one per counted mode with
/// `z != 1`: `u_s = (z_s - 1) U0^{-1} e_{m_s}`, `v_s = e_{m_s}^T U0`.
pub fn build_fcs_lowrank(spec: &CountingSpec) -> Result<LowRankOperator> {
    let inv = checked_inverse(&spec.u0)?;
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for c in spec.counted.iter().filter(|c| c.z != ONE) {
        let scale = c.z - 1.0;
        u.push(inv.column(c.mode).into_iter().map(|x| x * scale).collect());
        v.push(spec.u0.row(c.mode).to_vec());
    }
    LowRankOperator::new(spec.dim(), u, v)
}

/// `chi` through the finite-rank fast paths.
pub fn chi(state: &ProductState, spec: &CountingSpec) -> Result<Complex64> {
    chi_with(state, spec, &ExecConfig::default())
}

pub fn chi_with(state: &ProductState, spec: &CountingSpec, exec: &ExecConfig) -> Result<Complex64> {
    if spec.dim() != state.total_modes() {
        return Err(Error::DimensionMismatch(format!(
            "counting spec on {} modes for a state on {} modes",
            spec.dim(),
            state.total_modes()
        )));
    }
    match state.flavor() {
        Flavor::Fermion => expectation_lowrank_with(state, &build_fcs_lowrank(spec)?, exec),
        Flavor::Boson if state.is_single_boson_product() => permanent_lowrank(&build_fcs_lowrank(spec)?),
        Flavor::Boson => Err(Error::Unsupported(
            "bosonic counting statistics are only available for one boson per mode".into(),
        )),
    }
}

/// `chi` by applying the full operator in the brute-force simulator.
pub fn chi_oracle(state: &ProductState, spec: &CountingSpec) -> Result<Complex64> {
    let phi = expand_product(state)?;
    let u = build_fcs_operator(spec)?;
    matrix_element(&phi, &u, &phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    /// Counted modes, in the order of the tuple entries.
    pub modes: Vec<usize>,
    /// Occupation tuples, last mode varying fastest.
    pub support: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
    /// Largest `|Im P|` discarded by the inversion.
    pub max_imag: f64,
    /// Smallest probability before clamping.
    pub min_raw: f64,
}

impl CountDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `sum_n P(n) prod_m z_m^{n_m}`.
    pub fn generating_function(&self, zs: &[Complex64]) -> Complex64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(occ, &p)| occ.iter().zip(zs).map(|(&n, z)| z.powu(n as u32)).product::<Complex64>() * p)
            .sum()
    }

    /// Header `n<mode>,...,probability`, one row per support tuple.
    pub fn to_csv(&self, digits: usize) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.modes.iter().map(|m| format!("n{m}")).collect();
        header.push("probability".into());
        w.write_record(&header)?;
        for (occ, p) in self.support.iter().zip(&self.probs) {
            let mut row: Vec<String> = occ.iter().map(ToString::to_string).collect();
            row.push(format_sig(*p, digits));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Largest count per mode: one for fermions, the particle number for bosons.
fn count_cutoff(state: &ProductState) -> Result<usize> {
    match state.flavor() {
        Flavor::Fermion => Ok(1),
        Flavor::Boson => state
            .particle_number()
            .ok_or_else(|| Error::Unsupported("bosonic state without a definite particle number".into())),
    }
}

/// `P(n)` over `modes`, from chi on the discrete Fourier grid
/// `z_m = exp(2 pi i t_m / (c + 1))`, `t_m = 0..=c`. Counted modes of `spec`
/// outside `modes` keep their multipliers.
pub fn probabilities_from_chi(
    state: &ProductState,
    spec: &CountingSpec,
    modes: &[usize],
    exec: &ExecConfig,
) -> Result<CountDistribution> {
    if modes.is_empty() || modes.len() > MAX_GRID_MODES {
        return Err(Error::GuardExceeded(format!("{} counted modes (allowed 1..={MAX_GRID_MODES})", modes.len())));
    }
    let cutoff = count_cutoff(state)?;
    let side = cutoff + 1;
    let points = side
        .checked_pow(modes.len() as u32)
        .filter(|&p| p <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::GuardExceeded(format!("grid of {side}^{} points (limit {MAX_GRID_POINTS})", modes.len())))?;
    // Validate once, before fanning out.
    spec.with_multipliers(modes, &vec![ONE; modes.len()])?;

    let digits = |mut idx: usize| {
        let mut t = vec![0usize; modes.len()];
        for slot in t.iter_mut().rev() {
            *slot = idx % side;
            idx /= side;
        }
        t
    };
    let root = |k: usize| Complex64::from_polar(1.0, TAU * (k % side) as f64 / side as f64);
    let serial = ExecConfig { threads: 1, deterministic: exec.deterministic };
    let values: Vec<Result<Complex64>> = exec.map(points, |idx| {
        let zs: Vec<Complex64> = digits(idx).into_iter().map(root).collect();
        chi_with(state, &spec.with_multipliers(modes, &zs)?, &serial)
    });
    let mut grid = values.into_iter().collect::<Result<Vec<_>>>()?;

    // Inverse transform one axis at a time.
    let mut stride = 1;
    for _ in 0..modes.len() {
        let mut next = vec![ZERO; points];
        for (idx, slot) in next.iter_mut().enumerate() {
            let n = (idx / stride) % side;
            let base = idx - n * stride;
            let mut acc = ZERO;
            for t in 0..side {
                acc += grid[base + t * stride] * root(side - (t * n) % side);
            }
            *slot = acc / side as f64;
        }
        grid = next;
        stride *= side;
    }

    let mut max_imag: f64 = 0.0;
    let mut min_raw = f64::INFINITY;
    let mut probs = Vec::with_capacity(points);
    for p in &grid {
        max_imag = max_imag.max(p.im.abs());
        min_raw = min_raw.min(p.re);
        probs.push(if p.re < 0.0 && p.re > -CLAMP_TOL { 0.0 } else { p.re });
    }
    Ok(CountDistribution {
        modes: modes.to_vec(),
        support: (0..points).map(digits).collect(),
        probs,
        max_imag,
        min_raw,
    })
}

/// `n_samples` i.i.d. draws by inverse CDF; negative weights count as zero.
pub fn sample_counts(dist: &CountDistribution, n_samples: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for &p in &dist.probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    if acc.is_nan() || acc <= 0.0 {
        return Err(Error::InvalidInput("distribution has no positive weight".into()));
    }
    let last = dist.probs.iter().rposition(|&p| p > 0.0).expect("positive weight exists");
    let mut rng = seeded(seed);
    Ok((0..n_samples)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            dist.support[idx].clone()
        })
        .collect())
}

#[derive(Deserialize, Serialize)]
struct CountedJson {
    mode: usize,
    z: [f64; 2],
}

#[derive(Deserialize)]
struct SpecJson {
    u0: MatrixJson,
    counted: Vec<CountedJson>,
}

impl CountingSpec {
    /// `{"u0": <matrix>, "counted": [{"mode": m, "z": [re, im]}, ..]}`
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(text)?;
        let counted = raw.counted.into_iter().map(|c| CountedMode { mode: c.mode, z: Complex64::new(c.z[0], c.z[1]) }).collect();
        Self::new(raw.u0.into_matrix()?, counted)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Counted {
            mode: usize,
            z: [Sig17; 2],
        }
        let counted: Vec<Counted> = self.counted.iter().map(|c| Counted { mode: c.mode, z: [Sig17(c.z.re), Sig17(c.z.im)] }).collect();
        format!(
            "{{\"u0\":{},\"counted\":{}}}",
            self.u0.to_json(),
            serde_json::to_string(&counted).expect("counted modes serialize")
        )
    }
}
