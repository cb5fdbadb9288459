use localent::hilbert::{build_hamiltonian, ground_state, Boundary, ModelFamily, ModelSpec};
use localent::le::{le_exact, le_monte_carlo, McOptions, Measure, MeasurementStrategy};
use localent::mps::{densify, from_dense};

/// 100 seeded chains on a truncated Ising MPS against exact enumeration of
/// the same MPS. The naive error bar ignores autocorrelation, so the count
/// is checked with the `sqrt(tau)` correction and the naive count is printed.
#[test]
fn seeded_runs_track_exact_enumeration() {
    let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 0.8 }, 10, Boundary::Periodic);
    let h = build_hamiltonian(&spec).unwrap();
    let psi = ground_state(&h, 1, 1e-8).unwrap().canonical_ground_state();
    let mps = from_dense(&psi, 8).unwrap();
    let s = MeasurementStrategy::standard(&mps.site_dims(10).unwrap(), 0, 3).unwrap();
    let exact = le_exact(&densify(&mps, 10).unwrap(), &s, Measure::Concurrence).unwrap().mean;
    let (mut naive, mut corrected) = (0, 0);
    for seed in 0..100 {
        let opts = McOptions { sweeps: 1000, seed, ..McOptions::default() };
        let e = le_monte_carlo(&mps, 10, &s, Measure::Concurrence, &opts).unwrap();
        let z = (e.mean - exact).abs() / e.std_error;
        naive += (z <= 3.0) as usize;
        corrected += (z <= 3.0 * e.autocorr_time.unwrap().sqrt()) as usize;
    }
    println!("within 3 std_errors: naive {naive}/100, tau-corrected {corrected}/100");
    assert!(corrected >= 99, "{corrected}/100");
}

#[test]
fn chains_pool_deterministically() {
    let spec = ModelSpec::new(ModelFamily::IsingTransverse { lambda: 1.0 }, 8, Boundary::Periodic);
    let h = build_hamiltonian(&spec).unwrap();
    let psi = ground_state(&h, 1, 1e-8).unwrap().canonical_ground_state();
    let mps = from_dense(&psi, 16).unwrap();
    let s = MeasurementStrategy::standard(&mps.site_dims(8).unwrap(), 1, 5).unwrap();
    let opts = McOptions { sweeps: 300, chains: 3, seed: 42, ..McOptions::default() };
    let a = le_monte_carlo(&mps, 8, &s, Measure::Entropy, &opts).unwrap();
    let b = le_monte_carlo(&mps, 8, &s, Measure::Entropy, &opts).unwrap();
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.samples, 900);
}
