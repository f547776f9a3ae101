#![allow(dead_code)]

use hopsweep::ising::{IsingModel, QuboModel};
use hopsweep::mpo::OperatorTerm;
use nalgebra::DMatrix;
use rand::Rng;

/// Random symmetric QUBO with uniform entries in (−2, 2).
pub fn random_qubo<R: Rng>(n: usize, density: f64, rng: &mut R) -> QuboModel {
    let mut q = QuboModel::new(n);
    for i in 0..n {
        for j in i..n {
            if i == j || rng.gen_bool(density) {
                q.set(i, j, rng.gen_range(-2.0..2.0)).unwrap();
            }
        }
    }
    q.offset = rng.gen_range(-3.0..3.0);
    q
}

/// QUBO whose Ising couplings are drawn from {−2, −1, 1, 2} at the given
/// density, with integer diagonal entries.
pub fn integer_glass_qubo<R: Rng>(n: usize, density: f64, rng: &mut R) -> QuboModel {
    const J: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
    let mut q = QuboModel::new(n);
    for i in 0..n {
        q.set(i, i, f64::from(rng.gen_range(-2..=2))).unwrap();
        for j in i + 1..n {
            if rng.gen_bool(density) {
                q.set(i, j, J[rng.gen_range(0..4)] / 2.0).unwrap();
            }
        }
    }
    q
}

pub fn random_ising<R: Rng>(n: usize, density: f64, rng: &mut R) -> IsingModel {
    let mut m = IsingModel::new(n);
    for i in 0..n {
        m.hz[i] = rng.gen_range(-1.5..1.5);
        for j in i + 1..n {
            if rng.gen_bool(density) {
                m.add_coupling(i, j, rng.gen_range(-2.0..2.0)).unwrap();
            }
        }
    }
    m.constant = rng.gen_range(-1.0..1.0);
    m
}

/// Bits of `mask`, bit k → variable k.
pub fn bits(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|k| (mask >> k & 1) as u8).collect()
}

/// Σ_{i,j} Q_ij x_i x_j + offset by explicit double loop.
pub fn qubo_by_loops(q: &QuboModel, x: &[u8]) -> f64 {
    let n = q.n();
    let mut e = q.offset;
    for i in 0..n {
        for j in 0..n {
            e += q.get(i, j) * f64::from(x[i]) * f64::from(x[j]);
        }
    }
    e
}

fn kron_site(n: usize, site: usize, op: [[f64; 2]; 2]) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let local = DMatrix::from_fn(2, 2, |r, c| op[r][c]);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for k in 0..n {
        out = out.kronecker(if k == site { &local } else { &id });
    }
    out
}

/// Dense operator from Kronecker products; site 0 is the most significant
/// factor and basis state 0 of each factor is spin up.
pub fn kron_hamiltonian(terms: &[OperatorTerm], n: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for t in terms {
        let mut m = DMatrix::<f64>::identity(dim, dim);
        for &(site, op) in &t.factors {
            m = kron_site(n, site, op.matrix()) * m;
        }
        h += m * t.coefficient;
    }
    h
}

pub fn lowest_eigenvalue(h: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(h.clone()).eigenvalues.min()
}
