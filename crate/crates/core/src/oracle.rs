//! Exact reference answers for small instances.
//!
//! [`brute_force_ground`] enumerates every spin configuration in Gray-code
//! order, updating the energy incrementally through local fields.
//! [`dense_ground_energy`] materializes the full 2ᴺ×2ᴺ operator and
//! diagonalizes it.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{ising_energy, IsingModel};
use crate::mpo::OperatorTerm;
use crate::mps::SpinConfiguration;

pub const MAX_BRUTE_FORCE_SPINS: usize = 24;
pub const MAX_DENSE_SPINS: usize = 12;
/// Minimizers beyond this count are not stored.
pub const MAX_STORED_CONFIGS: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{n} spins exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("model has no spins")]
    Empty,
    #[error("term {term} is invalid for {n} sites")]
    BadTerm { term: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_energy: f64,
    /// Every minimizing configuration, ordered by bit string (spin down = 0).
    pub best_configs: Vec<SpinConfiguration>,
    pub evaluated_count: u64,
    /// More minimizers exist than were stored.
    pub truncated: bool,
}

pub fn brute_force_ground(model: &IsingModel) -> Result<OracleResult, OracleError> {
    let n = model.n();
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_BRUTE_FORCE_SPINS {
        return Err(OracleError::TooLarge { n, cap: MAX_BRUTE_FORCE_SPINS });
    }
    let adj = model.adjacency();
    let scale = 1.0
        + model.constant.abs()
        + model.hz.iter().map(|h| h.abs()).sum::<f64>()
        + model.couplings().map(|(_, _, j)| j.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    // Start from all spins down; bit k of `mask` set means spin k is up.
    let mut spin = vec![-0.5; n];
    let mut field: Vec<f64> = (0..n)
        .map(|k| model.hz[k] + adj[k].iter().map(|&(j, c)| c * spin[j]).sum::<f64>())
        .collect();
    let config_of = |mask: u32| SpinConfiguration::from_bits(&(0..n).map(|k| (mask >> k & 1) as u8).collect::<Vec<_>>());
    let mut energy = ising_energy(model, &config_of(0)).expect("length matches");
    let mut mask: u32 = 0;

    let mut best = energy;
    let mut candidates: Vec<(u32, f64)> = vec![(0, energy)];
    let mut truncated = false;
    let total: u64 = 1 << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let delta = if spin[k] < 0.0 { 1.0 } else { -1.0 };
        energy += field[k] * delta;
        spin[k] += delta;
        mask ^= 1 << k;
        for &(j, c) in &adj[k] {
            field[j] += c * delta;
        }
        if energy < best - tol {
            best = energy;
            candidates.clear();
            truncated = false;
        }
        if energy <= best + tol {
            best = best.min(energy);
            if candidates.len() < MAX_STORED_CONFIGS {
                candidates.push((mask, energy));
            } else {
                truncated = true;
            }
        }
    }

    // Re-evaluate the survivors directly so drift in the running energy
    // cannot decide the answer.
    let exact: Vec<(u32, f64)> = candidates
        .iter()
        .map(|&(m, _)| (m, ising_energy(model, &config_of(m)).expect("length matches")))
        .collect();
    let best_energy = exact.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let exact_tol = 1e-12 * scale;
    let mut best_configs: Vec<SpinConfiguration> = exact
        .iter()
        .filter(|e| e.1 <= best_energy + exact_tol)
        .map(|e| config_of(e.0))
        .collect();
    best_configs.sort_by_key(|c| c.bits());
    Ok(OracleResult { best_energy, best_configs, evaluated_count: total, truncated })
}

/// Dense matrix of a term list (no offset); basis index bit `N−1−m` is set
/// when spin m is down.
pub fn dense_matrix(terms: &[OperatorTerm], n: usize) -> Result<DMatrix<f64>, OracleError> {
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_DENSE_SPINS {
        return Err(OracleError::TooLarge { n, cap: MAX_DENSE_SPINS });
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (t, term) in terms.iter().enumerate() {
        if term.factors.is_empty() || term.factors.iter().any(|&(s, _)| s >= n) {
            return Err(OracleError::BadTerm { term: t, n });
        }
        for col in 0..dim {
            let mut row = col;
            let mut amp = term.coefficient;
            for &(site, op) in &term.factors {
                let bit = 1usize << (n - 1 - site);
                let m = op.matrix();
                let inp = usize::from(row & bit != 0);
                // Each factor has exactly one nonzero entry per column.
                let out = if m[0][inp] != 0.0 { 0 } else { 1 };
                amp *= m[out][inp];
                if out != inp {
                    row ^= bit;
                }
            }
            h[(row, col)] += amp;
        }
    }
    Ok(h)
}

/// Lowest eigenvalue of a·H_x + b·H_z + b·offset.
pub fn dense_ground_energy(
    hx_terms: &[OperatorTerm],
    hz_terms: &[OperatorTerm],
    a: f64,
    b: f64,
    offset: f64,
    n: usize,
) -> Result<f64, OracleError> {
    let terms: Vec<OperatorTerm> = hx_terms
        .iter()
        .map(|t| t.scaled(a))
        .chain(hz_terms.iter().map(|t| t.scaled(b)))
        .collect();
    let h = dense_matrix(&terms, n)?;
    let dim = h.nrows();
    let diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || h[(i, j)] == 0.0));
    let lowest = if diagonal {
        h.diagonal().min()
    } else {
        SymmetricEigen::new(h).eigenvalues.min()
    };
    Ok(lowest + b * offset)
}
