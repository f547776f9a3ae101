//! Matrix product states for chains of spin-1/2 sites.
//!
//! Each site tensor has labels `(l, p, r)`: left bond, physical index and
//! right bond. Physical index 0 is spin up (Sᶻ = +1/2), index 1 is spin
//! down. The outer bonds of the chain have extent 1.
//!
//! A [`MatrixProductState`] always carries an orthogonality center: every
//! tensor to its left is left-isometric, every tensor to its right is
//! right-isometric, and the center tensor alone carries the norm. Sites
//! are numbered from 0.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{contract, gemm, DenseTensor, TensorError};

pub const LEFT: &str = "l";
pub const PHYS: &str = "p";
pub const RIGHT: &str = "r";

/// Sᶻ in the (up, down) basis.
pub const SZ: [[f64; 2]; 2] = [[0.5, 0.0], [0.0, -0.5]];
/// Sˣ in the (up, down) basis.
pub const SX: [[f64; 2]; 2] = [[0.0, 0.5], [0.5, 0.0]];

const CHECKPOINT_FORMAT: &str = "hopsweep-mps";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("a state needs at least one site")]
    Empty,
    #[error("bond dimension must be at least 1")]
    ZeroBond,
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("length mismatch: {left} vs {right} sites")]
    LengthMismatch { left: usize, right: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("malformed site {site}: {reason}")]
    MalformedSite { site: usize, reason: String },
    #[error("too many sites ({n}) for a dense expansion (cap {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type MpsResult<T> = Result<T, MpsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Sᶻ eigenvalue, ±1/2.
    pub fn value(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }

    /// Binary image under x = Sᶻ + 1/2.
    pub fn bit(self) -> u8 {
        match self {
            Spin::Up => 1,
            Spin::Down => 0,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Classical assignment of ±1/2 to every spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinConfiguration(pub Vec<Spin>);

impl SpinConfiguration {
    pub fn new(spins: Vec<Spin>) -> Self {
        Self(spins)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| Spin::from_bit(b != 0)).collect())
    }

    pub fn spins(&self) -> &[Spin] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|s| s.value()).collect()
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|s| s.bit()).collect()
    }

    pub fn n_up(&self) -> usize {
        self.0.iter().filter(|&&s| s == Spin::Up).count()
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Spin::Up => "↑",
                Spin::Down => "↓",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState {
    sites: Vec<DenseTensor>,
    center: usize,
}

fn site_tensor(dl: usize, dr: usize, data: Vec<f64>) -> MpsResult<DenseTensor> {
    Ok(DenseTensor::new(&[dl, 2, dr], &[LEFT, PHYS, RIGHT], data)?)
}

/// Largest useful bond extent between sites `k` and `k+1` of an `n`-site chain.
fn max_bond_at(n: usize, k: usize, cap: usize) -> usize {
    let exp = (k + 1).min(n - k - 1);
    if exp >= 63 {
        cap
    } else {
        cap.min(1usize << exp)
    }
}

/// (|↑⟩ − |↓⟩)/√2 on every site, the Sˣ = −1/2 eigenstate.
pub fn minus_product_state(n: usize) -> MpsResult<MatrixProductState> {
    if n == 0 {
        return Err(MpsError::Empty);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sites = (0..n)
        .map(|_| site_tensor(1, 1, vec![h, -h]))
        .collect::<MpsResult<Vec<_>>>()?;
    Ok(MatrixProductState { sites, center: 0 })
}

/// Computational basis state.
pub fn product_state(spins: &[Spin]) -> MpsResult<MatrixProductState> {
    if spins.is_empty() {
        return Err(MpsError::Empty);
    }
    let sites = spins
        .iter()
        .map(|s| {
            let mut data = vec![0.0; 2];
            data[s.index()] = 1.0;
            site_tensor(1, 1, data)
        })
        .collect::<MpsResult<Vec<_>>>()?;
    Ok(MatrixProductState { sites, center: 0 })
}

/// Random normalized state with entries drawn uniformly from (−1, 1),
/// canonicalized at site 0.
pub fn random_mps(n: usize, d: usize, seed: u64) -> MpsResult<MatrixProductState> {
    random_mps_with(n, d, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_mps_with<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> MpsResult<MatrixProductState> {
    if n == 0 {
        return Err(MpsError::Empty);
    }
    if d == 0 {
        return Err(MpsError::ZeroBond);
    }
    let bonds: Vec<usize> = (0..n.saturating_sub(1)).map(|k| max_bond_at(n, k, d)).collect();
    let mut sites = Vec::with_capacity(n);
    for k in 0..n {
        let dl = if k == 0 { 1 } else { bonds[k - 1] };
        let dr = if k + 1 == n { 1 } else { bonds[k] };
        let data = (0..dl * 2 * dr).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sites.push(site_tensor(dl, dr, data)?);
    }
    let mut state = MatrixProductState::from_sites(sites)?;
    state.normalize()?;
    Ok(state)
}

impl MatrixProductState {
    /// Build from arbitrary site tensors, then bring into canonical form
    /// centered at site 0.
    pub fn from_sites(sites: Vec<DenseTensor>) -> MpsResult<Self> {
        validate_sites(&sites)?;
        let n = sites.len();
        let mut state = Self { sites, center: n - 1 };
        state.move_center(0)?;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn sites(&self) -> &[DenseTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &DenseTensor {
        &self.sites[k]
    }

    /// Extents of the N−1 internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.len() - 1].iter().map(|s| s.dims()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn norm(&self) -> f64 {
        self.sites[self.center].norm()
    }

    pub fn normalize(&mut self) -> MpsResult<()> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(MpsError::ZeroNorm);
        }
        self.sites[self.center] = self.sites[self.center].scaled(1.0 / norm)?;
        Ok(())
    }

    /// Copy of the state with its orthogonality center at `new_center`.
    pub fn canonicalize(&self, new_center: usize) -> MpsResult<Self> {
        let mut out = self.clone();
        out.move_center(new_center)?;
        Ok(out)
    }

    pub fn move_center(&mut self, new_center: usize) -> MpsResult<()> {
        let n = self.len();
        if new_center >= n {
            return Err(MpsError::SiteOutOfRange { site: new_center, n });
        }
        while self.center < new_center {
            self.shift_right()?;
        }
        while self.center > new_center {
            self.shift_left()?;
        }
        Ok(())
    }

    fn shift_right(&mut self) -> MpsResult<()> {
        let k = self.center;
        let (dl, dr) = (self.sites[k].dims()[0], self.sites[k].dims()[2]);
        let m = DMatrix::from_row_slice(dl * 2, dr, self.sites[k].data());
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        let kk = q.ncols();
        self.sites[k] = site_tensor(dl, kk, row_major(&q))?;
        let next = &self.sites[k + 1];
        let (nl, nr) = (next.dims()[0], next.dims()[2]);
        let mut data = vec![0.0; kk * 2 * nr];
        gemm(kk, nl, 2 * nr, &row_major(&r), next.data(), &mut data);
        self.sites[k + 1] = site_tensor(kk, nr, data)?;
        self.center = k + 1;
        Ok(())
    }

    fn shift_left(&mut self) -> MpsResult<()> {
        let k = self.center;
        let (dl, dr) = (self.sites[k].dims()[0], self.sites[k].dims()[2]);
        // QR of the transpose: M = Rᵀ Qᵀ with Qᵀ right-isometric.
        let m = DMatrix::from_column_slice(2 * dr, dl, self.sites[k].data());
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        let kk = q.ncols();
        self.sites[k] = site_tensor(kk, dr, row_major(&q.transpose()))?;
        let prev = &self.sites[k - 1];
        let (pl, pr) = (prev.dims()[0], prev.dims()[2]);
        let mut data = vec![0.0; pl * 2 * kk];
        gemm(pl * 2, pr, kk, prev.data(), &row_major(&r.transpose()), &mut data);
        self.sites[k - 1] = site_tensor(pl, kk, data)?;
        self.center = k - 1;
        Ok(())
    }

    /// Replace sites `k` and `k+1` (the new center must be one of them and
    /// the other must already satisfy its isometry condition).
    pub(crate) fn set_pair(&mut self, k: usize, left: DenseTensor, right: DenseTensor, center: usize) {
        debug_assert!(center == k || center == k + 1);
        self.sites[k] = left;
        self.sites[k + 1] = right;
        self.center = center;
    }

    /// Largest deviation from the isometry conditions around the center.
    pub fn isometry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, site) in self.sites.iter().enumerate() {
            if k == self.center {
                continue;
            }
            let (dl, dr) = (site.dims()[0], site.dims()[2]);
            let gram = if k < self.center {
                let m = DMatrix::from_row_slice(dl * 2, dr, site.data());
                m.transpose() * m
            } else {
                let m = DMatrix::from_row_slice(dl, 2 * dr, site.data());
                &m * m.transpose()
            };
            for i in 0..gram.nrows() {
                for j in 0..gram.ncols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((gram[(i, j)] - want).abs());
                }
            }
        }
        worst
    }

    /// Amplitude of a computational basis state.
    pub fn amplitude(&self, spins: &[Spin]) -> MpsResult<f64> {
        if spins.len() != self.len() {
            return Err(MpsError::LengthMismatch { left: self.len(), right: spins.len() });
        }
        let mut row = vec![1.0];
        for (site, s) in self.sites.iter().zip(spins) {
            let (dl, dr) = (site.dims()[0], site.dims()[2]);
            let mut next = vec![0.0; dr];
            for (a, &x) in row.iter().enumerate().take(dl) {
                let base = (a * 2 + s.index()) * dr;
                for (b, v) in next.iter_mut().enumerate() {
                    *v += x * site.data()[base + b];
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// Full 2ᴺ amplitude vector; site 0 is the most significant bit and
    /// bit value 1 means spin down.
    pub fn to_dense(&self) -> MpsResult<Vec<f64>> {
        const CAP: usize = 24;
        if self.len() > CAP {
            return Err(MpsError::TooLarge { n: self.len(), cap: CAP });
        }
        let mut psi = vec![1.0];
        let mut rows = 1;
        for site in &self.sites {
            let (dl, dr) = (site.dims()[0], site.dims()[2]);
            let mut next = vec![0.0; rows * 2 * dr];
            gemm(rows, dl, 2 * dr, &psi, site.data(), &mut next);
            psi = next;
            rows *= 2;
        }
        Ok(psi)
    }

    /// ⟨ψ|op_m|ψ⟩ / ⟨ψ|ψ⟩.
    pub fn expect_site(&self, op: &[[f64; 2]; 2], m: usize) -> MpsResult<f64> {
        let n = self.len();
        if m >= n {
            return Err(MpsError::SiteOutOfRange { site: m, n });
        }
        let state = self.canonicalize(m)?;
        Ok(local_expectation(&state.sites[m], op))
    }

    /// ⟨op_m⟩ for every site, in one left-to-right pass.
    pub fn expect_all(&self, op: &[[f64; 2]; 2]) -> MpsResult<Vec<f64>> {
        let mut state = self.canonicalize(0)?;
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for m in 0..n {
            out.push(local_expectation(&state.sites[m], op));
            if m + 1 < n {
                state.shift_right()?;
            }
        }
        Ok(out)
    }

    /// (Σ⟨Sˣ_m⟩, Σ⟨Sᶻ_m⟩ − (n_up_ground − N/2)); the offset is skipped when
    /// no ground-state up count is known.
    pub fn total_spin_traces(&self, n_up_ground: Option<usize>) -> MpsResult<(f64, f64)> {
        let sx: f64 = self.expect_all(&SX)?.iter().sum();
        let sz: f64 = self.expect_all(&SZ)?.iter().sum();
        let offset = n_up_ground.map_or(0.0, |up| up as f64 - self.len() as f64 / 2.0);
        Ok((sx, sz - offset))
    }

    /// Threshold each ⟨Sᶻ_m⟩ at zero, reading ties as up.
    pub fn readout(&self) -> MpsResult<SpinConfiguration> {
        Ok(readout_from(&self.expect_all(&SZ)?))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            center: self.center,
            sites: self
                .sites
                .iter()
                .map(|s| CheckpointSite { dims: s.dims().to_vec(), data: s.data().to_vec() })
                .collect(),
        }
    }

    pub fn from_checkpoint(cp: Checkpoint) -> MpsResult<Self> {
        if cp.format != CHECKPOINT_FORMAT {
            return Err(MpsError::Checkpoint(format!("unknown format `{}`", cp.format)));
        }
        if cp.version != CHECKPOINT_VERSION {
            return Err(MpsError::Checkpoint(format!("unsupported version {}", cp.version)));
        }
        let sites = cp
            .sites
            .into_iter()
            .map(|s| Ok(DenseTensor::new(&s.dims, &[LEFT, PHYS, RIGHT], s.data)?))
            .collect::<MpsResult<Vec<_>>>()?;
        validate_sites(&sites)?;
        if cp.center >= sites.len() {
            return Err(MpsError::SiteOutOfRange { site: cp.center, n: sites.len() });
        }
        let mut state = Self { sites, center: cp.center };
        if state.isometry_residual() > 1e-10 {
            let sites = std::mem::take(&mut state.sites);
            state = Self::from_sites(sites)?;
            state.move_center(cp.center)?;
        }
        Ok(state)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> MpsResult<()> {
        let text = serde_json::to_string(&self.to_checkpoint())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> MpsResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_checkpoint(serde_json::from_str(&text)?)
    }
}

pub fn readout_from(sz: &[f64]) -> SpinConfiguration {
    SpinConfiguration(sz.iter().map(|&v| Spin::from_bit(v >= 0.0)).collect())
}

/// Versioned on-disk form of a state: per-site dims and row-major data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub center: usize,
    pub sites: Vec<CheckpointSite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSite {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

fn validate_sites(sites: &[DenseTensor]) -> MpsResult<()> {
    if sites.is_empty() {
        return Err(MpsError::Empty);
    }
    let n = sites.len();
    for (k, s) in sites.iter().enumerate() {
        let bad = |reason: &str| MpsError::MalformedSite { site: k, reason: reason.to_string() };
        if s.labels() != [LEFT, PHYS, RIGHT] {
            return Err(bad("labels must be (l, p, r)"));
        }
        if s.dims()[1] != 2 {
            return Err(bad("physical extent must be 2"));
        }
        if k == 0 && s.dims()[0] != 1 {
            return Err(bad("left boundary bond must have extent 1"));
        }
        if k + 1 == n && s.dims()[2] != 1 {
            return Err(bad("right boundary bond must have extent 1"));
        }
        if k + 1 < n && s.dims()[2] != sites[k + 1].dims()[0] {
            return Err(bad("right bond does not match the next site"));
        }
    }
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// ⟨A|op|A⟩ / ⟨A|A⟩ for a center tensor A.
fn local_expectation(a: &DenseTensor, op: &[[f64; 2]; 2]) -> f64 {
    let (dl, dr) = (a.dims()[0], a.dims()[2]);
    let d = a.data();
    let (mut num, mut den) = (0.0, 0.0);
    for l in 0..dl {
        for r in 0..dr {
            let up = d[(l * 2) * dr + r];
            let down = d[(l * 2 + 1) * dr + r];
            num += up * (op[0][0] * up + op[0][1] * down) + down * (op[1][0] * up + op[1][1] * down);
            den += up * up + down * down;
        }
    }
    num / den
}

/// ⟨a|b⟩ by zipper contraction.
pub fn inner(a: &MatrixProductState, b: &MatrixProductState) -> MpsResult<f64> {
    if a.len() != b.len() {
        return Err(MpsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mut env = DenseTensor::new(&[1, 1], &["a", "b"], vec![1.0])?;
    for (sa, sb) in a.sites.iter().zip(&b.sites) {
        let mut t = contract(&env, sa, &[("a", LEFT)])?;
        t.relabel(RIGHT, "a")?;
        env = contract(&t, sb, &[("b", LEFT), (PHYS, PHYS)])?.with_labels(&["a", "b"])?;
    }
    Ok(env.data()[0])
}
