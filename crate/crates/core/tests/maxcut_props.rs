mod common;

use common::bits;
use hopsweep::ising::{ising_energy, to_ising};
use hopsweep::maxcut::{cut_value, cut_value_int, parse_biqmac, rescale, to_qubo, Graph};
use hopsweep::mps::SpinConfiguration;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let w = loop {
                    let w = rng.gen_range(-100i32..=100);
                    if w != 0 {
                        break w;
                    }
                };
                edges.push((i, j, f64::from(w)));
            }
        }
    }
    Graph { n_vertices: n, edges }
}

fn to_text(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n_vertices, g.edges.len());
    for &(i, j, w) in &g.edges {
        s.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cut_is_minus_objective_exhaustively(n in 2usize..=14, density in 0.1f64..1.0, seed in any::<u64>()) {
        let g = random_graph(n, density, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = to_qubo(&g).unwrap();
        for mask in 0..1u64 << n {
            let x = bits(mask, n);
            let cut = cut_value_int(&g, &x).unwrap();
            prop_assert_eq!(cut as f64, -q.objective(&x).unwrap());
            prop_assert_eq!(cut as f64, cut_value(&g, &x).unwrap());
        }
    }

    #[test]
    fn complement_has_same_cut(n in 2usize..=80, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(n, 0.2, &mut rng);
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let y: Vec<u8> = x.iter().map(|b| 1 - b).collect();
        prop_assert_eq!(cut_value_int(&g, &x).unwrap(), cut_value_int(&g, &y).unwrap());
    }

    #[test]
    fn ising_image_has_zero_field(n in 2usize..=120, density in 0.05f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(n, density, &mut rng);
        let m = to_ising(&to_qubo(&g).unwrap());
        prop_assert!(m.hz.iter().all(|&h| h == 0.0));
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let e = ising_energy(&m, &SpinConfiguration::from_bits(&x)).unwrap();
        prop_assert_eq!(e, -(cut_value_int(&g, &x).unwrap() as f64));
    }

    #[test]
    fn parse_round_trip(n in 2usize..=40, seed in any::<u64>()) {
        let g = random_graph(n, 0.3, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(parse_biqmac(&to_text(&g)).unwrap(), g);
    }

    #[test]
    fn rescale_preserves_argmin(n in 2usize..=10, seed in any::<u64>()) {
        let g = random_graph(n, 0.6, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assume!(!g.edges.is_empty());
        let m = to_ising(&to_qubo(&g).unwrap());
        let (s, factor) = rescale(&m).unwrap();
        prop_assert!((s.max_abs_coupling() - 1.0).abs() < 1e-15);
        for mask in 0..1u64 << n {
            let c = SpinConfiguration::from_bits(&bits(mask, n));
            let e = ising_energy(&m, &c).unwrap();
            prop_assert!((ising_energy(&s, &c).unwrap() * factor - e).abs() < 1e-9 * e.abs().max(1.0));
        }
    }
}
