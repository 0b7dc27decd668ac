use fcs_kit::exec::ExecConfig;
use fcs_kit::fcs::{chi, chi_oracle, probabilities_from_chi, CountedMode, CountingSpec};
use fcs_kit::fermion_lowrank::expectation_lowrank;
use fcs_kit::fock::{apply_noninteracting, matrix_element};
use fcs_kit::numerics::{lowrank_to_dense, ComplexMatrix};
use fcs_kit::permanent::{permanent_lowrank, permanent_ryser};
use fcs_kit::random::{random_lowrank, random_orthonormal, random_unitary, seeded, unit_disk};
use fcs_kit::states::{expand_product, make_fermi_sea, make_psi4, make_single_boson, ProductState};
use fcs_kit::Complex64;
use proptest::prelude::*;

fn fermion_state(seed: u64, kind: u8, n: usize) -> ProductState {
    let mut rng = seeded(seed);
    match kind % 3 {
        0 => make_psi4(n.min(3)).unwrap(),
        1 => make_fermi_sea(&random_orthonormal(&mut rng, 2, 1), 2, n).unwrap(),
        _ => make_fermi_sea(&random_orthonormal(&mut rng, 3, 2), 3, n.min(3)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lowrank_permanent_matches_ryser(seed in any::<u64>(), n in 1usize..9, k in 0usize..4) {
        let v = random_lowrank(&mut seeded(seed), n, k);
        let dense = ComplexMatrix::identity(n).add(&lowrank_to_dense(&v)).unwrap();
        let want = permanent_ryser(&dense).unwrap();
        let got = permanent_lowrank(&v).unwrap();
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn fermion_expansion_matches_simulator(seed in any::<u64>(), kind in any::<u8>(), n in 1usize..5, k in 0usize..3) {
        let state = fermion_state(seed, kind, n);
        let v = random_lowrank(&mut seeded(seed ^ 1), state.total_modes(), k);
        let phi = expand_product(&state).unwrap();
        let u = ComplexMatrix::identity(v.dim()).add(&lowrank_to_dense(&v)).unwrap();
        let want = matrix_element(&phi, &u, &phi).unwrap();
        let got = expectation_lowrank(&state, &v).unwrap();
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn chi_is_one_without_counting(seed in any::<u64>(), kind in any::<u8>(), n in 1usize..5, boson in any::<bool>()) {
        let state = if boson { make_single_boson(n).unwrap() } else { fermion_state(seed, kind, n) };
        let m = state.total_modes();
        let mut rng = seeded(seed);
        let spec = CountingSpec::new(random_unitary(&mut rng, m), vec![CountedMode { mode: 0, z: Complex64::new(1.0, 0.0) }]).unwrap();
        prop_assert!((chi(&state, &spec).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn chi_fast_path_matches_simulator(seed in any::<u64>(), kind in any::<u8>(), n in 1usize..4, boson in any::<bool>()) {
        let state = if boson { make_single_boson(n).unwrap() } else { fermion_state(seed, kind, n) };
        let m = state.total_modes();
        let mut rng = seeded(seed);
        let u0 = random_unitary(&mut rng, m);
        let counted = (0..m.min(2)).map(|mode| CountedMode { mode, z: unit_disk(&mut rng) }).collect();
        let spec = CountingSpec::new(u0, counted).unwrap();
        let want = chi_oracle(&state, &spec).unwrap();
        prop_assert!((chi(&state, &spec).unwrap() - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn fourier_inversion_reproduces_chi(seed in any::<u64>(), n in 1usize..4, boson in any::<bool>()) {
        let state = if boson { make_single_boson(n + 1).unwrap() } else { fermion_state(seed, 1, n) };
        let m = state.total_modes();
        let mut rng = seeded(seed);
        let spec = CountingSpec::new(random_unitary(&mut rng, m), vec![]).unwrap();
        let modes = [0, m - 1];
        let dist = probabilities_from_chi(&state, &spec, &modes, &ExecConfig::default()).unwrap();
        prop_assert!(dist.min_raw >= -1e-9);
        prop_assert!((dist.total() - 1.0).abs() < 1e-9);
        prop_assert!(dist.max_imag <= 1e-10);
        let zs = [unit_disk(&mut rng), unit_disk(&mut rng)];
        let direct = chi(&state, &spec.with_multipliers(&modes, &zs).unwrap()).unwrap();
        prop_assert!((dist.generating_function(&zs) - direct).norm() < 1e-9);
    }

    #[test]
    fn evolution_preserves_norm_of_products(seed in any::<u64>(), kind in any::<u8>(), n in 1usize..4) {
        let state = fermion_state(seed, kind, n);
        let phi = expand_product(&state).unwrap();
        let u = random_unitary(&mut seeded(seed ^ 2), state.total_modes());
        let out = apply_noninteracting(&u, &phi).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}
