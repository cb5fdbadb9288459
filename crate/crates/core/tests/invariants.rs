use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use localent::correlations::{le_bounds_parity, max_correlation_qubits, qutrit_correlation_bound};
use localent::hilbert::{build_hamiltonian, ground_state, Boundary, ModelFamily, ModelSpec, PureState, SiteDims};
use localent::le::{le_exact, measurement_ensemble, optimize_le, Measure, MeasurementStrategy, OptimizeOptions};
use localent::linalg::{random_density, random_state, random_unitary, C64};
use localent::measures::{
    concurrence, concurrence_pure, entanglement_of_assistance, entropy_of_entanglement, f_of_c, negativity,
};
use localent::TwoSiteState;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pure(seed: u64, dims: Vec<usize>) -> PureState {
    let dims = SiteDims::new(dims).unwrap();
    let v = random_state(&mut rng(seed), dims.total());
    PureState::new(dims, v.as_slice().to_vec()).unwrap()
}

fn small() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(small())]

    #[test]
    fn pure_measures_in_range(seed in any::<u64>(), da in 2usize..5, db in 2usize..5) {
        let v = random_state(&mut rng(seed), da * db);
        let psi = TwoSiteState::pure(v, da, db).unwrap();
        let e = entropy_of_entanglement(&psi).unwrap();
        prop_assert!(e >= -1e-12 && e <= (da.min(db) as f64).log2() + 1e-12);
        let neg = negativity(&psi).unwrap();
        prop_assert!(neg >= -1e-12);
        if da == 2 && db == 2 {
            let c = concurrence_pure(&psi).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
            prop_assert!((f_of_c(c).unwrap() - e).abs() < 1e-9);
            prop_assert!((neg - c / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_concurrence_below_assistance(seed in any::<u64>(), rank in 1usize..5) {
        let rho = random_density(&mut rng(seed), 4, rank);
        let st = TwoSiteState::mixed(rho, 2, 2).unwrap();
        let c = concurrence(&st).unwrap();
        let eoa = entanglement_of_assistance(&st).unwrap();
        prop_assert!(c >= -1e-12 && c <= eoa + 1e-9);
        prop_assert!(eoa <= 1.0 + 1e-9);
    }

    #[test]
    fn ensemble_probabilities_sum_to_one(seed in any::<u64>(), j in 1usize..4) {
        let psi = random_pure(seed, vec![2, 3, 2, 2]);
        let mut r = rng(seed ^ 7);
        let bases: Vec<_> = (0..4)
            .map(|k| if k == 0 || k == j { None } else { Some(random_unitary(&mut r, psi.dims().dim(k))) })
            .collect();
        let s = MeasurementStrategy::new(psi.dims(), 0, j, bases, "random").unwrap();
        let ens = measurement_ensemble(&psi, &s).unwrap();
        prop_assert!((ens.total_probability() - 1.0).abs() < 1e-10);
        prop_assert!(ens.members.iter().all(|(p, _)| *p >= 0.0));
    }

    #[test]
    fn le_below_assistance_and_above_standard(seed in any::<u64>()) {
        let psi = random_pure(seed, vec![2, 2, 2, 2]);
        let std = le_exact(&psi, &MeasurementStrategy::standard(psi.dims(), 0, 3).unwrap(), Measure::Concurrence).unwrap();
        let opts = OptimizeOptions { restarts: 4, ..OptimizeOptions::default() };
        let opt = optimize_le(&psi, 0, 3, Measure::Concurrence, &opts).unwrap();
        let red = TwoSiteState::mixed(localent::hilbert::QuantumState::reduced(&psi, &[0, 3]).unwrap(), 2, 2).unwrap();
        let eoa = entanglement_of_assistance(&red).unwrap();
        prop_assert!(opt.mean >= std.mean - 1e-9);
        prop_assert!(opt.mean <= eoa + 1e-9);
    }

    #[test]
    fn two_qubit_correlation_below_concurrence(seed in any::<u64>()) {
        let psi = random_pure(seed, vec![2, 2, 2]);
        let (q, _, _) = max_correlation_qubits(&psi, 0, 2).unwrap();
        let std = le_exact(&psi, &MeasurementStrategy::standard(psi.dims(), 0, 2).unwrap(), Measure::Concurrence).unwrap();
        let red = TwoSiteState::mixed(localent::hilbert::QuantumState::reduced(&psi, &[0, 2]).unwrap(), 2, 2).unwrap();
        prop_assert!(q <= entanglement_of_assistance(&red).unwrap() + 1e-9);
        prop_assert!(std.mean <= entanglement_of_assistance(&red).unwrap() + 1e-9);
    }

    #[test]
    fn qutrit_bound_sandwich(seed in any::<u64>()) {
        let v: DVector<C64> = random_state(&mut rng(seed), 9);
        let psi = TwoSiteState::pure(v, 3, 3).unwrap();
        let b = qutrit_correlation_bound(&psi).unwrap();
        prop_assert!(b.q_max <= b.upper + 1e-9);
        prop_assert!(b.q_diag <= b.q_max + 1e-12);
        prop_assert!(b.e_lower <= entropy_of_entanglement(&psi).unwrap() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn parity_bounds_sandwich_ising(lambda in 0.2f64..2.0, j in 1usize..4) {
        let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda }, 7, Boundary::Periodic);
        let h = build_hamiltonian(&spec).unwrap();
        let psi = ground_state(&h, 1, 1e-8).unwrap().canonical_ground_state();
        let b = le_bounds_parity(&psi, 0, j).unwrap();
        let opts = OptimizeOptions { restarts: 4, ..OptimizeOptions::default() };
        let le = optimize_le(&psi, 0, j, Measure::Concurrence, &opts).unwrap().mean;
        prop_assert!(b.lower <= le + 1e-7, "lower {} le {}", b.lower, le);
        prop_assert!(le <= b.upper + 1e-9, "le {} upper {}", le, b.upper);
    }
}

#[test]
fn f32_measures_track_f64() {
    let v = random_state(&mut rng(3), 4);
    let v32: DVector<num_complex::Complex<f32>> = v.map(|z| num_complex::Complex::new(z.re as f32, z.im as f32));
    let c64 = concurrence_pure(&TwoSiteState::pure(v, 2, 2).unwrap()).unwrap();
    let c32 = concurrence_pure(&localent::measures::TwoSiteState::<f32>::pure(v32, 2, 2).unwrap()).unwrap();
    assert!((c64 - c32 as f64).abs() < 1e-5);
}

proptest! {
    #![proptest_config(small())]

    #[test]
    fn entropy_between_f_of_concurrence_and_concurrence(seed in any::<u64>(), j in 1usize..4) {
        let psi = random_pure(seed, vec![2, 2, 2, 2]);
        let mut r = rng(seed ^ 11);
        let bases: Vec<_> = (0..4).map(|k| if k == 0 || k == j { None } else { Some(random_unitary(&mut r, 2)) }).collect();
        let s = MeasurementStrategy::new(psi.dims(), 0, j, bases, "random").unwrap();
        let c = le_exact(&psi, &s, Measure::Concurrence).unwrap().mean;
        let e = le_exact(&psi, &s, Measure::Entropy).unwrap().mean;
        prop_assert!(f_of_c(c.min(1.0)).unwrap() <= e + 1e-9);
        prop_assert!(e <= c + 1e-9);
    }
}

#[test]
fn standard_basis_concurrence_is_xx_correlation() {
    for lambda in [0.4, 0.8, 1.0, 1.6] {
        let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda }, 10, Boundary::Periodic);
        let h = build_hamiltonian(&spec).unwrap();
        let psi = ground_state(&h, 1, 1e-8).unwrap().canonical_ground_state();
        let x = localent::linalg::pauli(0);
        for j in 1..=5 {
            let l = le_exact(&psi, &MeasurementStrategy::standard(psi.dims(), 0, j).unwrap(), Measure::Concurrence).unwrap();
            let xx = localent::hilbert::QuantumState::expect_product(&psi, &[(0, x.clone()), (j, x.clone())]).unwrap().re;
            assert!((l.mean - xx.abs()).abs() < 1e-8, "lambda {lambda} j {j}: {} vs {}", l.mean, xx);
        }
    }
}
