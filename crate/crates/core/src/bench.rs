//! Wall-clock scaling measurements for the three permanent/expectation
//! algorithms.

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::exec::ExecConfig;
use crate::fermion_lowrank::expectation_lowrank_with;
use crate::format::format_sig;
use crate::numerics::{lowrank_to_dense, ComplexMatrix};
use crate::permanent::{permanent_lowrank, permanent_ryser};
use crate::random::{random_lowrank_scaled, random_matrix, seeded};
use crate::states::make_psi4;
use crate::{Error, Result};

/// Each timed repetition runs the computation until at least this long.
const MIN_BATCH_SECONDS: f64 = 0.01;
/// Fewest repetitions per record.
pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// `Per(1 + V)` through the auxiliary polynomial; size `N`, rank `k`.
    LowrankPermanent,
    /// Fermionic finite-rank expansion on `N` four-mode factors.
    FermionLowrank,
    /// Gray-code Ryser on a dense `N x N` matrix; `k` unused.
    Ryser,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LowrankPermanent => "lowrank-permanent",
            Algorithm::FermionLowrank => "fermion-lowrank",
            Algorithm::Ryser => "ryser",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowrank-permanent" => Ok(Algorithm::LowrankPermanent),
            "fermion-lowrank" => Ok(Algorithm::FermionLowrank),
            "ryser" => Ok(Algorithm::Ryser),
            _ => Err(Error::Parse(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub k: usize,
    /// Median seconds per evaluation.
    pub wall_time_seconds: f64,
    pub repetitions: usize,
    /// The computed value, for reproducibility checks.
    pub checksum: Complex64,
}

/// A prepared benchmark instance.
enum Instance {
    Lowrank(crate::numerics::LowRankOperator),
    Fermion(crate::states::ProductState, crate::numerics::LowRankOperator),
    Dense(ComplexMatrix),
}

fn instance(algorithm: Algorithm, n: usize, k: usize, seed: u64) -> Result<Instance> {
    let mut rng = seeded(seed ^ ((n as u64) << 16) ^ k as u64);
    // Entries of size 1/sqrt(N) keep the values O(1) for every N.
    let scale = 1.0 / (n.max(1) as f64).sqrt();
    Ok(match algorithm {
        Algorithm::LowrankPermanent => Instance::Lowrank(random_lowrank_scaled(&mut rng, n, k, scale)),
        Algorithm::FermionLowrank => {
            let state = make_psi4(n)?;
            let v = random_lowrank_scaled(&mut rng, 4 * n, k, 1.0 / ((4 * n) as f64).sqrt());
            Instance::Fermion(state, v)
        }
        Algorithm::Ryser => Instance::Dense(random_matrix(&mut rng, n, n).scale(Complex64::new(scale, 0.0))),
    })
}

fn evaluate(inst: &Instance, exec: &ExecConfig) -> Result<Complex64> {
    match inst {
        Instance::Lowrank(v) => permanent_lowrank(v),
        Instance::Fermion(state, v) => expectation_lowrank_with(state, v, exec),
        Instance::Dense(m) => permanent_ryser(m),
    }
}

/// Times one `(algorithm, N, k)` point: `repetitions` timed batches, median
/// reported.
pub fn run_bench(algorithm: Algorithm, n: usize, k: usize, repetitions: usize, seed: u64, exec: &ExecConfig) -> Result<BenchRecord> {
    let repetitions = repetitions.max(MIN_REPETITIONS);
    let inst = instance(algorithm, n, k, seed)?;

    let start = Instant::now();
    let checksum = evaluate(&inst, exec)?;
    let first = start.elapsed().as_secs_f64();
    let batch = if first >= MIN_BATCH_SECONDS { 1 } else { ((MIN_BATCH_SECONDS / first.max(1e-9)).ceil() as usize).min(1 << 20) };

    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        for _ in 0..batch {
            std::hint::black_box(evaluate(std::hint::black_box(&inst), exec)?);
        }
        times.push(start.elapsed().as_secs_f64() / batch as f64);
    }
    times.sort_by(f64::total_cmp);
    Ok(BenchRecord { algorithm, n, k, wall_time_seconds: times[times.len() / 2], repetitions, checksum })
}

/// Least-squares slope of `ln t` against `ln N`.
pub fn fit_loglog_slope(records: &[BenchRecord]) -> Option<f64> {
    if records.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = records.iter().map(|r| ((r.n as f64).ln(), r.wall_time_seconds.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Least-squares slope of `log2 t` against `N`: the doubling rate per added row.
pub fn fit_log2_linear_slope(records: &[BenchRecord]) -> Option<f64> {
    if records.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.n as f64, r.wall_time_seconds.log2())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// CSV with header `algorithm,n,k,wall_time_seconds,repetitions,checksum_re,checksum_im`.
pub fn records_to_csv(records: &[BenchRecord], digits: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["algorithm", "n", "k", "wall_time_seconds", "repetitions", "checksum_re", "checksum_im"])?;
    for r in records {
        w.write_record([
            r.algorithm.name().to_string(),
            r.n.to_string(),
            r.k.to_string(),
            format_sig(r.wall_time_seconds, digits),
            r.repetitions.to_string(),
            format_sig(r.checksum.re, digits),
            format_sig(r.checksum.im, digits),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Dense reference for a low-rank benchmark instance, for spot checks.
pub fn lowrank_instance_dense(n: usize, k: usize, seed: u64) -> Result<ComplexMatrix> {
    match instance(Algorithm::LowrankPermanent, n, k, seed)? {
        Instance::Lowrank(v) => ComplexMatrix::identity(n).add(&lowrank_to_dense(&v)),
        _ => unreachable!("low-rank instance"),
    }
}
