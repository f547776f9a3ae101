use hopsweep::tensor::{contract, svd_split, DenseTensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(dims: &[usize], labels: &[String], rng: &mut ChaCha8Rng) -> DenseTensor {
    let len = dims.iter().product();
    DenseTensor::new(dims, labels, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn multi_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims {
        out = out.into_iter().flat_map(|p| (0..d).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Sum over contracted indices by brute force.
fn naive(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Vec<f64> {
    let free_a: Vec<usize> = (0..a.rank()).filter(|k| !pairs.iter().any(|p| p.0 == *k)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|k| !pairs.iter().any(|p| p.1 == *k)).collect();
    let fa_dims: Vec<usize> = free_a.iter().map(|&k| a.dims()[k]).collect();
    let fb_dims: Vec<usize> = free_b.iter().map(|&k| b.dims()[k]).collect();
    let c_dims: Vec<usize> = pairs.iter().map(|p| a.dims()[p.0]).collect();
    let mut out = Vec::new();
    for ia in multi_indices(&fa_dims) {
        for ib in multi_indices(&fb_dims) {
            let mut s = 0.0;
            for ic in multi_indices(&c_dims) {
                let mut xa = vec![0; a.rank()];
                let mut xb = vec![0; b.rank()];
                for (t, &k) in free_a.iter().enumerate() {
                    xa[k] = ia[t];
                }
                for (t, &k) in free_b.iter().enumerate() {
                    xb[k] = ib[t];
                }
                for (t, p) in pairs.iter().enumerate() {
                    xa[p.0] = ic[t];
                    xb[p.1] = ic[t];
                }
                s += a.get(&xa) * b.get(&xb);
            }
            out.push(s);
        }
    }
    out
}

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    num / den
}

/// Two random tensors (ranks 1–4, extents 1–5) sharing `k` paired indices.
fn pair_case() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize, u64)> {
    (1usize..=4, 1usize..=4, any::<u64>()).prop_flat_map(|(ra, rb, seed)| {
        let kmax = ra.min(rb);
        (
            proptest::collection::vec(1usize..=5, ra),
            proptest::collection::vec(1usize..=5, rb),
            0..=kmax,
            Just(seed),
        )
    })
}

fn build(da: &[usize], db: &[usize], k: usize, seed: u64) -> (DenseTensor, DenseTensor, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = db.to_vec();
    // Pair the last k axes of a with a shuffled choice of axes of b.
    let mut b_axes: Vec<usize> = (0..db.len()).collect();
    for i in (1..b_axes.len()).rev() {
        b_axes.swap(i, rng.gen_range(0..=i));
    }
    let pairs: Vec<(usize, usize)> = (0..k).map(|t| (da.len() - k + t, b_axes[t])).collect();
    for &(x, y) in &pairs {
        db[y] = da[x];
    }
    let la: Vec<String> = (0..da.len()).map(|i| format!("a{i}")).collect();
    let lb: Vec<String> = (0..db.len()).map(|i| format!("b{i}")).collect();
    (random_tensor(da, &la, &mut rng), random_tensor(&db, &lb, &mut rng), pairs)
}

fn label_pairs(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Vec<(String, String)> {
    pairs.iter().map(|&(x, y)| (a.labels()[x].clone(), b.labels()[y].clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn low_rank_matrices_reconstruct(rows in 1usize..=6, cols in 1usize..=6, rank in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; rows * cols];
        for _ in 0..rank {
            let u: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for i in 0..rows {
                for j in 0..cols {
                    data[i * cols + j] += u[i] * v[j];
                }
            }
        }
        let t = DenseTensor::new(&[rows, cols], &["r", "c"], data).unwrap();
        let r = svd_split(&t, &["r"], 2, 1e-10, "b").unwrap();
        prop_assert!(r.singular_values.iter().all(|&s| s >= 0.0));
        let back = contract(&r.left, &r.weighted_right(), &[("b", "b")]).unwrap();
        prop_assert!(rel_diff(back.data(), t.data()) < 1e-8);
    }

    #[test]
    fn contraction_matches_nested_loops((da, db, k, seed) in pair_case()) {
        let (a, b, pairs) = build(&da, &db, k, seed);
        let lp = label_pairs(&a, &b, &pairs);
        let lp: Vec<(&str, &str)> = lp.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
        let c = contract(&a, &b, &lp).unwrap();
        let reference = naive(&a, &b, &pairs);
        prop_assert!(rel_diff(c.data(), &reference) < 1e-12);
    }

    #[test]
    fn contraction_is_bilinear((da, db, k, seed) in pair_case(), alpha in -3.0f64..3.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let (a, b, pairs) = build(&da, &db, k, seed);
        let lp = label_pairs(&a, &b, &pairs);
        let lp: Vec<(&str, &str)> = lp.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
        let scaled = contract(&a.scaled(alpha).unwrap(), &b, &lp).unwrap();
        let plain = contract(&a, &b, &lp).unwrap();
        let expect: Vec<f64> = plain.data().iter().map(|v| alpha * v).collect();
        prop_assert!(rel_diff(scaled.data(), &expect) < 1e-12 || expect.iter().all(|v| v.abs() < 1e-300));
    }

    #[test]
    fn svd_round_trip(dims in proptest::collection::vec(1usize..=5, 2..=4), split in 1usize..4, seed in any::<u64>()) {
        let split = split.min(dims.len() - 1);
        let labels: Vec<String> = (0..dims.len()).map(|i| format!("x{i}")).collect();
        let t = random_tensor(&dims, &labels, &mut ChaCha8Rng::seed_from_u64(seed));
        let rows: Vec<&str> = labels[..split].iter().map(String::as_str).collect();
        let r = svd_split(&t, &rows, usize::MAX, 0.0, "bond").unwrap();
        let back = contract(&r.left, &r.weighted_right(), &[("bond", "bond")]).unwrap();
        prop_assert!(rel_diff(back.data(), t.data()) < 1e-10);
        prop_assert!(r.truncation_error == 0.0);
    }

    #[test]
    fn reported_truncation_matches_discarded_weight(rows in 2usize..=8, cols in 2usize..=8, rank in 1usize..=4, seed in any::<u64>()) {
        let t = random_tensor(&[rows, cols], &["r".to_string(), "c".to_string()], &mut ChaCha8Rng::seed_from_u64(seed));
        let full = svd_split(&t, &["r"], usize::MAX, 0.0, "b").unwrap();
        let cut = svd_split(&t, &["r"], rank, 0.0, "b").unwrap();
        let total: f64 = full.singular_values.iter().map(|s| s * s).sum();
        let kept: f64 = cut.singular_values.iter().map(|s| s * s).sum();
        prop_assert!(((total - kept) / total - cut.truncation_error).abs() < 1e-12);
        let approx = contract(&cut.left, &cut.weighted_right(), &[("b", "b")]).unwrap();
        let err: f64 = approx.data().iter().zip(t.data()).map(|(x, y)| (x - y).powi(2)).sum();
        prop_assert!((err / total - cut.truncation_error).abs() < 1e-10);
    }
}
