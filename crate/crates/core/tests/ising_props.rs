mod common;

use common::{bits, qubo_by_loops, random_qubo};
use hopsweep::ising::{characterize, ising_energy, to_ising, QuboModel};
use hopsweep::mps::SpinConfiguration;
use hopsweep::oracle::brute_force_ground;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_identity_exhaustive(n in 1usize..=12, density in 0.1f64..1.0, seed in any::<u64>()) {
        let q = random_qubo(n, density, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = to_ising(&q);
        for mask in 0..1u64 << n {
            let x = bits(mask, n);
            let e = ising_energy(&m, &SpinConfiguration::from_bits(&x)).unwrap();
            prop_assert!((e - qubo_by_loops(&q, &x)).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_identity_sampled(n in 13usize..=60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_qubo(n, 0.3, &mut rng);
        let m = to_ising(&q);
        for _ in 0..1000 {
            let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let e = ising_energy(&m, &SpinConfiguration::from_bits(&x)).unwrap();
            prop_assert!((e - q.objective(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn coupling_counts_add_up(n in 2usize..=40, density in 0.0f64..1.0, seed in any::<u64>()) {
        let m = to_ising(&random_qubo(n, density, &mut ChaCha8Rng::seed_from_u64(seed)));
        let p = characterize(&m).unwrap();
        prop_assert_eq!(p.counts.iter().sum::<usize>(), m.n_couplings());
        prop_assert!(p.rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
    }

    #[test]
    fn json_round_trip(n in 1usize..=15, seed in any::<u64>()) {
        let q = random_qubo(n, 0.4, &mut ChaCha8Rng::seed_from_u64(seed));
        let text = serde_json::to_string(&q.to_json()).unwrap();
        prop_assert_eq!(QuboModel::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), q);
    }
}

/// Minimizers of the QUBO, by direct enumeration of x.
fn qubo_minimizers(q: &QuboModel) -> (f64, Vec<Vec<u8>>) {
    let n = q.n();
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    for mask in 0..1u64 << n {
        let x = bits(mask, n);
        let e = q.objective(&x).unwrap();
        if e < best - 1e-9 {
            best = e;
            arg.clear();
        }
        if e <= best + 1e-9 {
            arg.push(x);
        }
    }
    (best, arg)
}

#[test]
fn argmin_is_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [4, 9, 14, 18] {
        for _ in 0..3 {
            let q = random_qubo(n, 0.4, &mut rng);
            let (best, mut arg) = qubo_minimizers(&q);
            let oracle = brute_force_ground(&to_ising(&q)).unwrap();
            assert!((oracle.best_energy - best).abs() < 1e-9);
            let mut spins: Vec<Vec<u8>> = oracle.best_configs.iter().map(|c| c.bits()).collect();
            arg.sort();
            spins.sort();
            assert_eq!(arg, spins);
        }
    }
}

#[test]
fn rejects_malformed_files() {
    assert!(serde_json::from_str::<hopsweep::ising::QuboFile>(r#"{"n": 2, "entries": [], "extra": 1}"#).is_err());
    let bad = serde_json::from_str(r#"{"n": 2, "entries": [[0, 1, 1.0]]}"#).unwrap();
    assert!(QuboModel::from_json(&bad).is_err());
    let v2 = serde_json::from_str(r#"{"version": 2, "n": 2, "entries": []}"#).unwrap();
    assert!(QuboModel::from_json(&v2).is_err());
}
