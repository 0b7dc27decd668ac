//! Random-instance comparisons behind `oracle-compare`.

use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::exec::ExecConfig;
use crate::fcs::{chi_oracle, chi_with, CountedMode, CountingSpec};
use crate::fermion_lowrank::expectation_lowrank_with;
use crate::fock::matrix_element;
use crate::format::format_sig;
use crate::numerics::{lowrank_to_dense, ComplexMatrix};
use crate::permanent::{permanent_lowrank, permanent_ryser};
use crate::random::{random_lowrank, random_orthonormal, random_unitary, seeded, unit_disk, ChaCha8Rng};
use crate::states::{
    expand_product, make_fermi_sea, make_psi4, make_single_boson, psi4_reduction_check, ProductState, PSI4_CHECK_MAX_N,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LowrankPermanent,
    FermionLowrank,
    Psi4Reduction,
    Fcs,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::LowrankPermanent => "lowrank-permanent",
            Family::FermionLowrank => "fermion-lowrank",
            Family::Psi4Reduction => "psi4-reduction",
            Family::Fcs => "fcs",
        }
    }

    /// Largest relative error accepted.
    pub fn tolerance(self) -> f64 {
        match self {
            Family::LowrankPermanent => 1e-8,
            Family::FermionLowrank | Family::Fcs => 1e-9,
            Family::Psi4Reduction => 1e-10,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowrank-permanent" => Ok(Family::LowrankPermanent),
            "fermion-lowrank" => Ok(Family::FermionLowrank),
            "psi4-reduction" => Ok(Family::Psi4Reduction),
            "fcs" => Ok(Family::Fcs),
            _ => Err(Error::Parse(format!("unknown family '{s}'"))),
        }
    }
}

pub struct Row {
    n: usize,
    k: usize,
    instances: usize,
    max_rel_error: f64,
}

pub struct Report {
    family: Family,
    rows: Vec<Row>,
}

impl Report {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.max_rel_error <= self.family.tolerance())
    }

    pub fn render(&self, digits: usize) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "family={} n={} k={} instances={} max_rel_error={}\n",
                self.family.name(),
                r.n,
                r.k,
                r.instances,
                format_sig(r.max_rel_error, digits)
            ));
        }
        out.push_str(&format!(
            "max_rel_error={} tolerance={} {}\n",
            format_sig(self.max_rel_error(), digits),
            format_sig(self.family.tolerance(), digits),
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

fn rel_error(got: Complex64, want: Complex64) -> f64 {
    let diff = (got - want).norm();
    if want.norm() > 0.0 {
        diff / want.norm()
    } else {
        diff
    }
}

/// A fermionic product state of `n` factors mixing Fermi-sea and four-mode
/// paired factors, small enough for the brute-force simulator.
fn random_fermion_state(rng: &mut ChaCha8Rng, n: usize) -> Result<ProductState> {
    if n <= PSI4_CHECK_MAX_N && rng.gen_bool(0.5) {
        return make_psi4(n);
    }
    let modes = if n <= 3 { 3 } else { 2 };
    let k = rng.gen_range(1..modes);
    make_fermi_sea(&random_orthonormal(rng, modes, k), modes, n)
}

pub fn compare(
    family: Family,
    sizes: &[usize],
    k: Option<usize>,
    instances: usize,
    seed: u64,
    exec: &ExecConfig,
) -> Result<Report> {
    let mut rng = seeded(seed);
    let mut rows = Vec::new();
    for &n in sizes {
        if n == 0 {
            return Err(Error::InvalidInput("sizes must be positive".into()));
        }
        match family {
            Family::LowrankPermanent => {
                for k in k.map_or(1..=3, |k| k..=k) {
                    let mut worst: f64 = 0.0;
                    for _ in 0..instances {
                        let v = random_lowrank(&mut rng, n, k);
                        let dense = ComplexMatrix::identity(n).add(&lowrank_to_dense(&v))?;
                        worst = worst.max(rel_error(permanent_lowrank(&v)?, permanent_ryser(&dense)?));
                    }
                    rows.push(Row { n, k, instances, max_rel_error: worst });
                }
            }
            Family::FermionLowrank => {
                for k in k.map_or(1..=2, |k| k..=k) {
                    let mut worst: f64 = 0.0;
                    for _ in 0..instances {
                        let state = random_fermion_state(&mut rng, n)?;
                        let m = state.total_modes();
                        let v = random_lowrank(&mut rng, m, k);
                        let u = ComplexMatrix::identity(m).add(&lowrank_to_dense(&v))?;
                        let phi = expand_product(&state)?;
                        let want = matrix_element(&phi, &u, &phi)?;
                        worst = worst.max(rel_error(expectation_lowrank_with(&state, &v, exec)?, want));
                    }
                    rows.push(Row { n, k, instances, max_rel_error: worst });
                }
            }
            Family::Psi4Reduction => {
                let mut worst: f64 = 0.0;
                for _ in 0..instances {
                    let u = random_unitary(&mut rng, 4 * n);
                    let psi = random_orthonormal(&mut rng, 4 * n, 2 * n);
                    let (lhs, rhs) = psi4_reduction_check(&u, n, &psi)?;
                    worst = worst.max(rel_error(lhs, rhs));
                }
                rows.push(Row { n, k: 0, instances, max_rel_error: worst });
            }
            Family::Fcs => {
                let counted_modes = k.unwrap_or(2);
                let mut worst: f64 = 0.0;
                for i in 0..instances {
                    let state = if i % 2 == 0 { random_fermion_state(&mut rng, n)? } else { make_single_boson(n)? };
                    let m = state.total_modes();
                    let u0 = random_unitary(&mut rng, m);
                    let counted = (0..counted_modes.min(m)).map(|mode| CountedMode { mode, z: unit_disk(&mut rng) }).collect();
                    let spec = CountingSpec::new(u0, counted)?;
                    worst = worst.max(rel_error(chi_with(&state, &spec, exec)?, chi_oracle(&state, &spec)?));
                }
                rows.push(Row { n, k: counted_modes, instances, max_rel_error: worst });
            }
        }
    }
    Ok(Report { family, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_passes_on_small_sizes() {
        let exec = ExecConfig::default();
        for (family, sizes) in [
            (Family::LowrankPermanent, vec![2, 5]),
            (Family::FermionLowrank, vec![1, 3]),
            (Family::Psi4Reduction, vec![1, 2]),
            (Family::Fcs, vec![2, 3]),
        ] {
            let report = compare(family, &sizes, None, 3, 11, &exec).unwrap();
            assert!(report.passed(), "{}", report.render(6));
            assert_eq!(family.name().parse::<Family>().unwrap(), family);
        }
    }
}
