mod common;

use hopsweep::dmrg::{run, SweepParams};
use hopsweep::ising::to_operator_terms;
use hopsweep::mpo::{mix, OperatorTerm, SpinOp};
use hopsweep::mps::random_mps;
use hopsweep::oracle::{brute_force_ground, dense_ground_energy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classical_limit_is_exact(n in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = common::integer_glass_qubo(n, 0.5, &mut rng);
        q.offset = f64::from(rng.gen_range(-5..=5));
        let m = hopsweep::ising::to_ising(&q);
        let (f, c, k) = to_operator_terms(&m);
        let hz: Vec<OperatorTerm> = f.into_iter().chain(c).collect();
        let hx: Vec<OperatorTerm> = (0..n).map(|s| OperatorTerm::single(1.0, s, SpinOp::Sx)).collect();
        let dense = dense_ground_energy(&hx, &hz, 0.0, 1.0, k, n).unwrap();
        prop_assert_eq!(dense, brute_force_ground(&m).unwrap().best_energy);
    }

    #[test]
    fn dmrg_never_beats_the_spectrum(n in 2usize..=8, seed in any::<u64>(), a in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_ising(n, 0.4, &mut rng);
        let (f, c, k) = to_operator_terms(&m);
        let hz: Vec<OperatorTerm> = f.into_iter().chain(c).collect();
        let hx: Vec<OperatorTerm> = (0..n).map(|s| OperatorTerm::single(rng.gen_range(0.5..1.5), s, SpinOp::Sx)).collect();
        let exact = dense_ground_energy(&hx, &hz, a, 1.0 - a, k, n).unwrap();
        let mpo = mix(&hx, &hz, a, 1.0 - a, k, n, 1e-12).unwrap();
        let params = SweepParams { max_bond: 4, nsweeps: 2, ..Default::default() };
        let out = run(&random_mps(n, 2, rng.gen()).unwrap(), &mpo, &params).unwrap();
        for e in &out.energy_history {
            prop_assert!(*e >= exact - 1e-9);
        }
    }
}

#[test]
fn dense_ground_state_of_kron_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=7 {
        let m = common::random_ising(n, 0.5, &mut rng);
        let (f, c, k) = to_operator_terms(&m);
        let hz: Vec<OperatorTerm> = f.into_iter().chain(c).collect();
        let hx: Vec<OperatorTerm> = (0..n).map(|s| OperatorTerm::single(0.8, s, SpinOp::Sx)).collect();
        let (a, b) = (0.3, 0.7);
        let terms: Vec<OperatorTerm> = hx.iter().map(|t| t.scaled(a)).chain(hz.iter().map(|t| t.scaled(b))).collect();
        let expect = common::lowest_eigenvalue(&common::kron_hamiltonian(&terms, n)) + b * k;
        assert!((dense_ground_energy(&hx, &hz, a, b, k, n).unwrap() - expect).abs() < 1e-10);
    }
}
