//! QUBO models, their Ising images and classical energies.
//!
//! A [`QuboModel`] holds a symmetric matrix `Q` and an offset; its objective
//! is `offset + Σ_{i,j} Q_ij x_i x_j` over binary `x`. Substituting
//! `x = Sᶻ + 1/2` gives an [`IsingModel`]
//!
//! ```text
//! E(s) = constant + Σ_{m<n} J̃_mn s_m s_n + Σ_m hᶻ_m s_m,   s ∈ {±1/2}
//! ```
//!
//! with `J̃_mn = 2 Q_mn`, `hᶻ_m = Σ_n Q_mn` and
//! `constant = offset + ½ Σ_m Q_mm + ½ Σ_{m<n} Q_mn`.
//!
//! # QUBO JSON
//!
//! ```json
//! {"version": 1, "n": 3, "offset": 0.0, "entries": [[1, 1, -1.0], [1, 2, 0.5]]}
//! ```
//!
//! Indices are 1-based. Each entry `[i, j, v]` with `i ≤ j` sets the matrix
//! element `Q_ij = Q_ji = v`, so an off-diagonal entry contributes `2v·x_i·x_j`
//! to the objective. Repeated entries accumulate, as do entries given with
//! `i > j`. `version` may be omitted.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mpo::{OperatorTerm, SpinOp};
use crate::mps::SpinConfiguration;

pub const QUBO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IsingError {
    #[error("expected {expected} variables, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index ({i}, {j}) out of range for {n} variables")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("need at least {need} spins, model has {n}")]
    TooFewSpins { need: usize, n: usize },
    #[error("coupling key ({m}, {n}) must satisfy m < n")]
    BadCouplingKey { m: usize, n: usize },
    #[error("unsupported QUBO format version {0}")]
    Version(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type IsingResult<T> = Result<T, IsingError>;

/// Symmetric QUBO matrix stored as its upper triangle (0-based keys `i ≤ j`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboModel {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl QuboModel {
    pub fn new(n: usize) -> Self {
        Self { n, entries: BTreeMap::new(), offset: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn key(&self, i: usize, j: usize) -> IsingResult<(usize, usize)> {
        if i >= self.n || j >= self.n {
            return Err(IsingError::IndexOutOfRange { i, j, n: self.n });
        }
        Ok((i.min(j), i.max(j)))
    }

    /// Q_ij (= Q_ji).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Set Q_ij = Q_ji = v.
    pub fn set(&mut self, i: usize, j: usize, v: f64) -> IsingResult<()> {
        if !v.is_finite() {
            return Err(IsingError::NonFinite);
        }
        let key = self.key(i, j)?;
        if v == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    /// Q_ij += v and, for i ≠ j, Q_ji += v.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> IsingResult<()> {
        let cur = self.get(i, j);
        self.set(i, j, cur + v)
    }

    /// Symmetrize an arbitrary square matrix as (Q + Qᵀ)/2.
    pub fn from_dense(rows: &[Vec<f64>], offset: f64) -> IsingResult<Self> {
        let n = rows.len();
        let mut q = Self::new(n);
        q.offset = offset;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(IsingError::LengthMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                let w = if i == j { v } else { v / 2.0 };
                q.add(i, j, w)?;
            }
        }
        Ok(q)
    }

    /// Nonzero upper-triangle entries `(i, j, Q_ij)` with `i ≤ j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Σ |Q_ij| over the full symmetric matrix, plus |offset|.
    pub fn coefficient_norm1(&self) -> f64 {
        self.offset.abs()
            + self
                .entries()
                .map(|(i, j, v)| if i == j { v.abs() } else { 2.0 * v.abs() })
                .sum::<f64>()
    }

    /// offset + xᵀQx.
    pub fn objective(&self, x: &[u8]) -> IsingResult<f64> {
        if x.len() != self.n {
            return Err(IsingError::LengthMismatch { expected: self.n, got: x.len() });
        }
        let mut e = self.offset;
        for (i, j, v) in self.entries() {
            if x[i] != 0 && x[j] != 0 {
                e += if i == j { v } else { 2.0 * v };
            }
        }
        Ok(e)
    }

    pub fn to_json(&self) -> QuboFile {
        QuboFile {
            version: Some(QUBO_FORMAT_VERSION),
            n: self.n,
            offset: self.offset,
            entries: self.entries().map(|(i, j, v)| (i + 1, j + 1, v)).collect(),
        }
    }

    pub fn from_json(file: &QuboFile) -> IsingResult<Self> {
        if let Some(v) = file.version {
            if v != QUBO_FORMAT_VERSION {
                return Err(IsingError::Version(v));
            }
        }
        if !file.offset.is_finite() {
            return Err(IsingError::NonFinite);
        }
        let mut q = Self::new(file.n);
        q.offset = file.offset;
        for &(i, j, v) in &file.entries {
            if i == 0 || j == 0 || i > file.n || j > file.n {
                return Err(IsingError::IndexOutOfRange { i, j, n: file.n });
            }
            q.add(i - 1, j - 1, v)?;
        }
        Ok(q)
    }

    pub fn load(path: impl AsRef<Path>) -> IsingResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> IsingResult<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}

/// Serialized form of a [`QuboModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuboFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub n: usize,
    #[serde(default)]
    pub offset: f64,
    pub entries: Vec<(usize, usize, f64)>,
}

/// Classical Ising model over spins ±1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    pub hz: Vec<f64>,
    pub constant: f64,
    /// Per-site transverse field, set by the driver.
    pub hx_base: Vec<f64>,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        Self { n, couplings: BTreeMap::new(), hz: vec![0.0; n], constant: 0.0, hx_base: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// J̃_mn for m < n.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(m, n), &j)| (m, n, j))
    }

    pub fn coupling(&self, m: usize, n: usize) -> f64 {
        self.couplings.get(&(m.min(n), m.max(n))).copied().unwrap_or(0.0)
    }

    pub fn n_couplings(&self) -> usize {
        self.couplings.len()
    }

    /// J̃_mn += j, keyed with m < n.
    pub fn add_coupling(&mut self, m: usize, n: usize, j: f64) -> IsingResult<()> {
        if m >= n {
            return Err(IsingError::BadCouplingKey { m, n });
        }
        if n >= self.n {
            return Err(IsingError::IndexOutOfRange { i: m, j: n, n: self.n });
        }
        if !j.is_finite() {
            return Err(IsingError::NonFinite);
        }
        let v = self.couplings.entry((m, n)).or_insert(0.0);
        *v += j;
        if *v == 0.0 {
            self.couplings.remove(&(m, n));
        }
        Ok(())
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.couplings.values().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Coupled neighbours of every site.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (m, n, j) in self.couplings() {
            adj[m].push((n, j));
            adj[n].push((m, j));
        }
        adj
    }

    /// Multiply couplings, fields and constant by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            couplings: self.couplings.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            hz: self.hz.iter().map(|h| h * factor).collect(),
            constant: self.constant * factor,
            hx_base: self.hx_base.clone(),
        }
    }
}

/// Exact image of a QUBO under x = Sᶻ + 1/2.
pub fn to_ising(q: &QuboModel) -> IsingModel {
    let mut model = IsingModel::new(q.n());
    let mut constant = q.offset;
    for (i, j, v) in q.entries() {
        if i == j {
            model.hz[i] += v;
            constant += 0.5 * v;
        } else {
            model.hz[i] += v;
            model.hz[j] += v;
            constant += 0.5 * v;
            model.add_coupling(i, j, 2.0 * v).expect("valid upper-triangle key");
        }
    }
    model.constant = constant;
    model
}

/// constant + Σ J̃_mn s_m s_n + Σ hᶻ_m s_m.
pub fn ising_energy(model: &IsingModel, s: &SpinConfiguration) -> IsingResult<f64> {
    if s.len() != model.n {
        return Err(IsingError::LengthMismatch { expected: model.n, got: s.len() });
    }
    let v = s.values();
    let mut e = model.constant;
    for (m, n, j) in model.couplings() {
        e += j * v[m] * v[n];
    }
    for (h, x) in model.hz.iter().zip(&v) {
        e += h * x;
    }
    Ok(e)
}

/// Field statistics and coupling filling fractions of a spin glass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassProfile {
    pub hz_mean: f64,
    /// Population standard deviation.
    pub hz_std: f64,
    /// `counts[d-1]`: couplings between spins at index distance d.
    pub counts: Vec<usize>,
    /// `rho[d-1] = counts[d-1] / (n − d)`.
    pub rho: Vec<f64>,
}

pub fn characterize(model: &IsingModel) -> IsingResult<GlassProfile> {
    let n = model.n;
    if n < 2 {
        return Err(IsingError::TooFewSpins { need: 2, n });
    }
    let mean = model.hz.iter().sum::<f64>() / n as f64;
    let var = model.hz.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n as f64;
    let mut counts = vec![0usize; n - 1];
    for (m, k, _) in model.couplings() {
        counts[k - m - 1] += 1;
    }
    let rho = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (n - i - 1) as f64)
        .collect();
    Ok(GlassProfile { hz_mean: mean, hz_std: var.sqrt(), counts, rho })
}

/// (Sᶻ field terms, SᶻSᶻ coupling terms, constant).
pub fn to_operator_terms(model: &IsingModel) -> (Vec<OperatorTerm>, Vec<OperatorTerm>, f64) {
    let fields = model
        .hz
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0.0)
        .map(|(m, &h)| OperatorTerm::single(h, m, SpinOp::Sz))
        .collect();
    let couplings = model
        .couplings()
        .map(|(m, n, j)| OperatorTerm::pair(j, m, SpinOp::Sz, n, SpinOp::Sz))
        .collect();
    (fields, couplings, model.constant)
}
