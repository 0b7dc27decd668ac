//! Product states and the closed-form expectation values known for them.
//!
//! A [`ProductState`] is an ordered list of factors, each living in its own
//! small Fock space. Factor `i` owns a contiguous block of global modes
//! starting after the modes of factors `0..i`; with `n` modes per factor that
//! is `[i*n, (i+1)*n)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{
    self, amps_out, apply_noninteracting, matrix_element, tensor_product, AmpJson, Flavor, FockVector,
    MAX_SECTOR_CONFIGS,
};
use crate::numerics::{dot_conj, ComplexMatrix, ONE, ZERO};
use crate::{Error, Result};

/// Tolerance for orthonormality of orbital sets.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Indefinite,
}

/// One normalized factor of a product state.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorState {
    local: FockVector,
    parity: Parity,
    particles: Option<usize>,
}

impl FactorState {
    pub fn new(local: FockVector) -> Result<Self> {
        local.require_normalized()?;
        let ns = local.particle_numbers();
        let parity = if ns.iter().all(|n| n % 2 == 0) {
            Parity::Even
        } else if ns.iter().all(|n| n % 2 == 1) {
            Parity::Odd
        } else {
            Parity::Indefinite
        };
        let particles = if ns.len() == 1 { Some(ns[0]) } else { None };
        Ok(FactorState { local, parity, particles })
    }

    pub fn flavor(&self) -> Flavor {
        self.local.flavor()
    }

    pub fn local_modes(&self) -> usize {
        self.local.modes()
    }

    pub fn amplitudes(&self) -> &FockVector {
        &self.local
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// The particle number, if the factor has a definite one.
    pub fn particle_number(&self) -> Option<usize> {
        self.particles
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<FactorState>,
}

impl ProductState {
    pub fn new(factors: Vec<FactorState>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidInput("a product state needs at least one factor".into()));
        };
        let flavor = first.flavor();
        if let Some(bad) = factors.iter().find(|f| f.flavor() != flavor) {
            return Err(Error::FlavorMismatch(format!("{flavor:?} and {:?} factors", bad.flavor())));
        }
        Ok(ProductState { factors })
    }

    /// `count` copies of `factor`.
    pub fn repeated(factor: FactorState, count: usize) -> Result<Self> {
        Self::new(vec![factor; count])
    }

    pub fn flavor(&self) -> Flavor {
        self.factors[0].flavor()
    }

    pub fn factors(&self) -> &[FactorState] {
        &self.factors
    }

    pub fn total_modes(&self) -> usize {
        self.factors.iter().map(FactorState::local_modes).sum()
    }

    /// First global mode of every factor, plus the total as a final entry.
    pub fn mode_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len() + 1);
        let mut acc = 0;
        out.push(0);
        for f in &self.factors {
            acc += f.local_modes();
            out.push(acc);
        }
        out
    }

    /// Total particle number, if every factor has a definite one.
    pub fn particle_number(&self) -> Option<usize> {
        self.factors.iter().map(FactorState::particle_number).sum()
    }

    /// True when every factor is one boson in one mode.
    pub fn is_single_boson_product(&self) -> bool {
        self.flavor() == Flavor::Boson
            && self.factors.iter().all(|f| f.local_modes() == 1 && f.local.amplitude(&[1]) != ZERO && f.local.len() == 1)
    }
}

/// `N` factors of one boson in one mode.
pub fn make_single_boson(n: usize) -> Result<ProductState> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one factor".into()));
    }
    let factor = FactorState::new(FockVector::basis(Flavor::Boson, vec![1])?)?;
    ProductState::repeated(factor, n)
}

/// Checks `<psi_a|psi_b> = delta_ab` within [`ORTHONORMAL_TOL`].
pub fn check_orthonormal(psi: &[Vec<Complex64>]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (a, pa) in psi.iter().enumerate() {
        for (b, pb) in psi.iter().enumerate() {
            if pa.len() != pb.len() {
                return Err(Error::DimensionMismatch("orbitals of different lengths".into()));
            }
            let want = if a == b { ONE } else { ZERO };
            deviation = deviation.max((dot_conj(pa, pb) - want).norm());
        }
    }
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// `N` identical factors `psi_1+ ... psi_k+ |vac>` over `modes` local modes.
pub fn make_fermi_sea(psi: &[Vec<Complex64>], modes: usize, n: usize) -> Result<ProductState> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one factor".into()));
    }
    check_orthonormal(psi)?;
    let factor = FactorState::new(fock::slater(psi, modes)?)?;
    ProductState::repeated(factor, n)
}

/// `N` factors `(f1+ f2+ + f3+ f4+)|vac> / sqrt 2`.
pub fn make_psi4(n: usize) -> Result<ProductState> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one factor".into()));
    }
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let local = FockVector::from_amplitudes(Flavor::Fermion, 4, [(vec![1, 1, 0, 0], h), (vec![0, 0, 1, 1], h)])?;
    ProductState::repeated(FactorState::new(local)?, n)
}

/// The product state as one vector over all global modes.
pub fn expand_product(p: &ProductState) -> Result<FockVector> {
    let configs = p.factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.local.len()));
    match configs {
        Some(c) if c <= MAX_SECTOR_CONFIGS => {}
        _ => {
            return Err(Error::GuardExceeded(format!(
                "expanded product exceeds {MAX_SECTOR_CONFIGS} configurations"
            )))
        }
    }
    let mut out = FockVector::vacuum(p.flavor(), 0);
    for f in &p.factors {
        out = tensor_product(&out, &f.local)?;
    }
    Ok(out)
}

/// `exp[alpha^2 (sum_ij U_ij - N)]` for `N` coherent modes of real amplitude
/// `alpha`.
pub fn coherent_expectation(alpha: f64, u: &ComplexMatrix) -> Result<Complex64> {
    let n = u.require_square()?;
    let total: Complex64 = u.data().iter().sum();
    Ok(((total - n as f64) * (alpha * alpha)).exp())
}

/// Coherent states `exp(alpha b+)|0>` on `modes` modes, cut at total particle
/// number `cutoff` and renormalized. Feeds the brute-force simulator.
pub fn make_coherent_truncated(alpha: f64, modes: usize, cutoff: usize) -> Result<FockVector> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput("alpha must be finite".into()));
    }
    let mut out = FockVector::zero(Flavor::Boson, modes);
    for p in 0..=cutoff {
        for occ in fock::sector_configs(Flavor::Boson, modes, p)? {
            // prod_j alpha^{n_j} / sqrt(n_j!)
            let amp: f64 = occ
                .iter()
                .map(|&n| alpha.powi(i32::from(n)) / (1..=u32::from(n)).map(f64::from).product::<f64>().sqrt())
                .product();
            out.add_amplitude(occ, Complex64::new(amp, 0.0))?;
        }
    }
    let norm = out.norm();
    Ok(out.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Embeds each factor's orbitals into its block of global modes.
fn embedded_orbitals(psi: &[Vec<Complex64>], modes: usize, n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n * psi.len());
    for i in 0..n {
        for orb in psi {
            let mut g = vec![ZERO; n * modes];
            g[i * modes..(i + 1) * modes].copy_from_slice(orb);
            out.push(g);
        }
    }
    out
}

/// `det_{ab} <phi_a|U|phi_b>` over the `N*k` occupied orbitals of
/// [`make_fermi_sea`]`(psi, modes, N)`.
pub fn fermi_sea_expectation(psi: &[Vec<Complex64>], modes: usize, n: usize, u: &ComplexMatrix) -> Result<Complex64> {
    check_orthonormal(psi)?;
    if let Some(bad) = psi.iter().find(|p| p.len() != modes) {
        return Err(Error::DimensionMismatch(format!("orbital of length {} for {modes} modes", bad.len())));
    }
    let dim = u.require_square()?;
    if dim != n * modes {
        return Err(Error::DimensionMismatch(format!("{dim}x{dim} operator for {} modes", n * modes)));
    }
    let orbitals = embedded_orbitals(psi, modes, n);
    let images: Vec<Vec<Complex64>> = orbitals.iter().map(|o| u.mul_vec(o)).collect::<Result<_>>()?;
    let gram = ComplexMatrix::from_fn(orbitals.len(), orbitals.len(), |a, b| dot_conj(&orbitals[a], &images[b]));
    crate::numerics::determinant(&gram)
}

/// Largest `N` accepted by [`psi4_reduction_check`].
pub const PSI4_CHECK_MAX_N: usize = 3;

/// Both sides of the reduction identity
/// `<Psi4|^N Y^ U^ |Psi4>^N = 2^(-N/2) <x|U^|Psi4>^N`.
///
/// `psi` holds `2N` orthonormal vectors over `4N` modes and defines
/// `|x> = psi_1+ ... psi_2N+ |vac>`. `Y = sum_m |f_t(m)><psi_m|` sends them to
/// the modes `0, 1, 4, 5, 8, 9, ...` in that order.
pub fn psi4_reduction_check(u: &ComplexMatrix, n: usize, psi: &[Vec<Complex64>]) -> Result<(Complex64, Complex64)> {
    if n == 0 || n > PSI4_CHECK_MAX_N {
        return Err(Error::GuardExceeded(format!("N={n} outside 1..={PSI4_CHECK_MAX_N}")));
    }
    let modes = 4 * n;
    let dim = u.require_square()?;
    if dim != modes {
        return Err(Error::DimensionMismatch(format!("{dim}x{dim} operator for {modes} modes")));
    }
    if psi.len() != 2 * n || psi.iter().any(|p| p.len() != modes) {
        return Err(Error::DimensionMismatch(format!("need {} vectors of length {modes}", 2 * n)));
    }
    check_orthonormal(psi)?;

    let mut y = ComplexMatrix::zeros(modes, modes);
    for (m, p) in psi.iter().enumerate() {
        let target = 4 * (m / 2) + m % 2;
        for j in 0..modes {
            y[(target, j)] = p[j].conj();
        }
    }
    let phi = expand_product(&make_psi4(n)?)?;
    let evolved = apply_noninteracting(u, &phi)?;
    let lhs = matrix_element(&phi, &y, &evolved)?;
    let x = fock::slater(psi, modes)?;
    let rhs = matrix_element(&x, u, &phi)? * 2f64.powf(-(n as f64) / 2.0);
    Ok((lhs, rhs))
}

#[derive(Deserialize)]
struct FactorJson {
    local_modes: usize,
    amps: Vec<AmpJson>,
}

#[derive(Deserialize)]
struct ProductJson {
    flavor: Flavor,
    factors: Vec<FactorJson>,
}

#[derive(Serialize)]
struct FactorOut<'a> {
    local_modes: usize,
    amps: Vec<fock::AmpOut<'a>>,
}

#[derive(Serialize)]
struct ProductOut<'a> {
    flavor: Flavor,
    factors: Vec<FactorOut<'a>>,
}

impl ProductState {
    /// `{"flavor": .., "factors": [{"local_modes": n, "amps": [{"occ", "re", "im"}, ..]}, ..]}`
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProductJson = serde_json::from_str(text)?;
        let factors = raw
            .factors
            .into_iter()
            .map(|f| {
                let local = FockVector::from_amplitudes(
                    raw.flavor,
                    f.local_modes,
                    f.amps.into_iter().map(|a| (a.occ, Complex64::new(a.re, a.im))),
                )?;
                FactorState::new(local)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn to_json(&self) -> String {
        let maps: Vec<_> = self.factors.iter().map(|f| f.local.iter().map(|(o, a)| (o.clone(), *a)).collect()).collect();
        let out = ProductOut {
            flavor: self.flavor(),
            factors: self
                .factors
                .iter()
                .zip(&maps)
                .map(|(f, m)| FactorOut { local_modes: f.local_modes(), amps: amps_out(m) })
                .collect(),
        };
        serde_json::to_string(&out).expect("state serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner;
    use crate::permanent::permanent_ryser;
    use crate::random::{random_matrix, random_orthonormal, random_unitary, seeded};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn oracle_expectation(p: &ProductState, u: &ComplexMatrix) -> Complex64 {
        let phi = expand_product(p).unwrap();
        matrix_element(&phi, u, &phi).unwrap()
    }

    #[test]
    fn single_boson_examples() {
        let one = make_single_boson(1).unwrap();
        assert_eq!(expand_product(&one).unwrap().amplitude(&[1]), ONE);
        let three = expand_product(&make_single_boson(3).unwrap()).unwrap();
        assert_eq!(three.amplitude(&[1, 1, 1]), ONE);
        assert_eq!(inner(&three, &three).unwrap(), ONE);
        assert!(make_single_boson(3).unwrap().is_single_boson_product());
        assert_eq!(expand_product(&make_single_boson(4).unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn fermi_sea_examples() {
        let vac = make_fermi_sea(&[], 3, 2).unwrap();
        assert_eq!(vac.factors()[0].amplitudes().amplitude(&[0, 0, 0]), ONE);
        assert_eq!(vac.factors()[0].parity(), Parity::Even);

        let basis: Vec<Vec<Complex64>> = (0..3).map(|i| (0..3).map(|j| c(f64::from(u8::from(i == j)))).collect()).collect();
        let full = make_fermi_sea(&basis, 3, 1).unwrap();
        assert_eq!(full.factors()[0].amplitudes().amplitude(&[1, 1, 1]), ONE);
        assert_eq!(full.factors()[0].parity(), Parity::Odd);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = make_fermi_sea(&[vec![c(h), c(h)]], 2, 1).unwrap();
        let f = s.factors()[0].amplitudes();
        assert!((f.amplitude(&[1, 0]) - c(h)).norm() < 1e-16);
        assert!((f.amplitude(&[0, 1]) - c(h)).norm() < 1e-16);

        assert!(matches!(make_fermi_sea(&[vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]], 2, 1), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn psi4_examples() {
        let p = make_psi4(1).unwrap();
        let h = c(std::f64::consts::FRAC_1_SQRT_2);
        let f = p.factors()[0].amplitudes();
        assert_eq!(f.amplitude(&[1, 1, 0, 0]), h);
        assert_eq!(f.amplitude(&[0, 0, 1, 1]), h);
        assert_eq!(p.factors()[0].parity(), Parity::Even);
        assert!((oracle_expectation(&p, &ComplexMatrix::identity(4)) - ONE).norm() < 1e-15);
        let two = expand_product(&make_psi4(2).unwrap()).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|(_, a)| (a - c(0.5)).norm() < 1e-15));
    }

    #[test]
    fn product_state_validation() {
        let b = FactorState::new(FockVector::basis(Flavor::Boson, vec![1]).unwrap()).unwrap();
        let f = FactorState::new(FockVector::basis(Flavor::Fermion, vec![1]).unwrap()).unwrap();
        assert!(matches!(ProductState::new(vec![b, f]), Err(Error::FlavorMismatch(_))));
        assert!(ProductState::new(vec![]).is_err());
        let unnorm = FockVector::from_amplitudes(Flavor::Boson, 1, [(vec![1], c(2.0))]).unwrap();
        assert!(matches!(FactorState::new(unnorm), Err(Error::NotNormalized { .. })));
        let h = c(std::f64::consts::FRAC_1_SQRT_2);
        let mixed = FockVector::from_amplitudes(Flavor::Fermion, 1, [(vec![0], h), (vec![1], h)]).unwrap();
        assert_eq!(FactorState::new(mixed).unwrap().parity(), Parity::Indefinite);
    }

    #[test]
    fn coherent_examples() {
        let mut rng = seeded(3);
        let u = random_matrix(&mut rng, 3, 3);
        assert_eq!(coherent_expectation(0.0, &u).unwrap(), ONE);
        assert!((coherent_expectation(0.8, &ComplexMatrix::identity(3)).unwrap() - ONE).norm() < 1e-15);
        let cc = Complex64::new(0.3, 0.4);
        let one = ComplexMatrix::from_rows(&[vec![cc]]).unwrap();
        let want = ((cc - 1.0) * 0.49).exp();
        assert!((coherent_expectation(0.7, &one).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn truncated_coherent_converges_to_closed_form() {
        let mut rng = seeded(21);
        for modes in 1..=3 {
            let u = random_unitary(&mut rng, modes);
            let phi = make_coherent_truncated(0.5, modes, 8).unwrap();
            let got = matrix_element(&phi, &u, &phi).unwrap();
            let want = coherent_expectation(0.5, &u).unwrap();
            assert!((got - want).norm() < 1e-6, "modes={modes}");
        }
    }

    #[test]
    fn permanent_identity_through_product_states() {
        let mut rng = seeded(31);
        for n in 1..=6 {
            let u = random_matrix(&mut rng, n, n);
            let got = oracle_expectation(&make_single_boson(n).unwrap(), &u);
            let want = permanent_ryser(&u).unwrap();
            assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn fermi_sea_determinant_formula() {
        let mut rng = seeded(41);
        for &(n, modes, k) in &[(1, 3, 2), (2, 2, 1), (2, 3, 2), (3, 3, 1), (2, 5, 2), (5, 2, 1)] {
            let psi = random_orthonormal(&mut rng, modes, k);
            let u = random_matrix(&mut rng, n * modes, n * modes);
            let want = oracle_expectation(&make_fermi_sea(&psi, modes, n).unwrap(), &u);
            let got = fermi_sea_expectation(&psi, modes, n, &u).unwrap();
            assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()), "n={n} modes={modes} k={k}");
        }
        let psi = random_orthonormal(&mut rng, 2, 1);
        assert!((fermi_sea_expectation(&psi, 2, 3, &ComplexMatrix::identity(6)).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn fermi_sea_block_diagonal_full_band() {
        let mut rng = seeded(43);
        let basis: Vec<Vec<Complex64>> = (0..2).map(|i| (0..2).map(|j| c(f64::from(u8::from(i == j)))).collect()).collect();
        let b1 = random_matrix(&mut rng, 2, 2);
        let b2 = random_matrix(&mut rng, 2, 2);
        let u = ComplexMatrix::from_fn(4, 4, |i, j| match (i / 2, j / 2) {
            (0, 0) => b1[(i, j)],
            (1, 1) => b2[(i - 2, j - 2)],
            _ => ZERO,
        });
        let got = fermi_sea_expectation(&basis, 2, 2, &u).unwrap();
        let want = crate::numerics::determinant(&b1).unwrap() * crate::numerics::determinant(&b2).unwrap();
        assert!((got - want).norm() < 1e-13);
        assert!(matches!(fermi_sea_expectation(&basis, 2, 3, &u), Err(Error::DimensionMismatch(_))));
    }

    fn target_orbitals(n: usize) -> Vec<Vec<Complex64>> {
        (0..2 * n)
            .map(|m| {
                let mut v = vec![ZERO; 4 * n];
                v[4 * (m / 2) + m % 2] = ONE;
                v
            })
            .collect()
    }

    #[test]
    fn psi4_reduction_at_identity() {
        // Brute force: Y projects onto f1 f2, and <x|Psi4> = 1/sqrt2, so both
        // sides are 1/2.
        let (lhs, rhs) = psi4_reduction_check(&ComplexMatrix::identity(4), 1, &target_orbitals(1)).unwrap();
        assert!((lhs - c(0.5)).norm() < 1e-15);
        assert!((rhs - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn psi4_reduction_random() {
        let mut rng = seeded(51);
        for n in 1..=3 {
            let u = random_unitary(&mut rng, 4 * n);
            let psi = random_orthonormal(&mut rng, 4 * n, 2 * n);
            let (lhs, rhs) = psi4_reduction_check(&u, n, &psi).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "N={n}: {lhs} vs {rhs}");
            assert!(rhs.norm() > 1e-6);
        }
        assert!(psi4_reduction_check(&ComplexMatrix::identity(16), 4, &target_orbitals(4)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = seeded(61);
        let psi = random_orthonormal(&mut rng, 3, 2);
        let p = make_fermi_sea(&psi, 3, 2).unwrap();
        assert_eq!(ProductState::from_json(&p.to_json()).unwrap(), p);
    }
}
