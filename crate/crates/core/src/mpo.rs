//! Matrix product operators for sums of one- and two-spin terms.
//!
//! Site tensors carry labels `(wl, o, i, wr)`: left bond, output (bra)
//! physical index, input (ket) physical index, right bond. A constant
//! offset rides along as a plain scalar.
//!
//! [`compile`] builds the usual lower-triangular finite-state machine with
//! a "start" channel (nothing placed yet), a "finish" channel (term
//! complete) and middle channels carrying open two-spin terms. The middle
//! channels at each cut are obtained from a singular value decomposition of
//! the coefficients of the terms crossing that cut, so dense long-range
//! couplings only cost as many channels as the rank of that block.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mps::{MatrixProductState, LEFT, PHYS, RIGHT};
use crate::tensor::{contract, svd_split, DenseTensor, TensorError};

pub const WL: &str = "wl";
pub const OUT: &str = "o";
pub const IN: &str = "i";
pub const WR: &str = "wr";

/// Default threshold for dropping coupling channels, relative to the
/// 1-norm of the term coefficients.
pub const DEFAULT_COMPRESS_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MpoError {
    #[error("operator needs at least one site")]
    Empty,
    #[error("term {term}: site {site} out of range for {n} sites")]
    SiteOutOfRange { term: usize, site: usize, n: usize },
    #[error("term {term}: {reason}")]
    BadTerm { term: usize, reason: String },
    #[error("non-finite coefficient or offset")]
    NonFinite,
    #[error("operator has {mpo} sites but state has {state}")]
    LengthMismatch { mpo: usize, state: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type MpoResult<T> = Result<T, MpoError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpinOp {
    Sx,
    Sz,
}

impl SpinOp {
    pub fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            SpinOp::Sx => crate::mps::SX,
            SpinOp::Sz => crate::mps::SZ,
        }
    }

    fn slot(self) -> usize {
        match self {
            SpinOp::Sx => 0,
            SpinOp::Sz => 1,
        }
    }
}

/// `coefficient · Π op(site)` over one or two distinct sites (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub coefficient: f64,
    pub factors: Vec<(usize, SpinOp)>,
}

impl OperatorTerm {
    pub fn single(coefficient: f64, site: usize, op: SpinOp) -> Self {
        Self { coefficient, factors: vec![(site, op)] }
    }

    pub fn pair(coefficient: f64, m: usize, op_m: SpinOp, n: usize, op_n: SpinOp) -> Self {
        Self { coefficient, factors: vec![(m, op_m), (n, op_n)] }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coefficient: self.coefficient * factor, factors: self.factors.clone() }
    }

    fn validate(&self, term: usize, n: usize) -> MpoResult<()> {
        if !self.coefficient.is_finite() {
            return Err(MpoError::NonFinite);
        }
        let bad = |reason: &str| MpoError::BadTerm { term, reason: reason.to_string() };
        match self.factors.as_slice() {
            [] => return Err(bad("no factors")),
            [_] => {}
            [(m, _), (k, _)] if m >= k => return Err(bad("sites must be strictly increasing")),
            [_, _] => {}
            _ => return Err(bad("more than two factors")),
        }
        for &(site, _) in &self.factors {
            if site >= n {
                return Err(MpoError::SiteOutOfRange { term, site, n });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductOperator {
    sites: Vec<DenseTensor>,
    offset: f64,
}

impl MatrixProductOperator {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[DenseTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &DenseTensor {
        &self.sites[k]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.len() - 1].iter().map(|w| w.dims()[3]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩ + offset.
    pub fn expectation(&self, state: &MatrixProductState) -> MpoResult<f64> {
        if state.len() != self.len() {
            return Err(MpoError::LengthMismatch { mpo: self.len(), state: state.len() });
        }
        let mut env = boundary_env();
        for (a, w) in state.sites().iter().zip(&self.sites) {
            env = extend_left(&env, a, w)?;
        }
        Ok(env.data()[0] / state.norm().powi(2) + self.offset)
    }
}

pub(crate) const EK: &str = "ek";
pub(crate) const EW: &str = "ew";
pub(crate) const EB: &str = "eb";

/// Trivial 1×1×1 environment closing either end of the chain.
pub(crate) fn boundary_env() -> DenseTensor {
    DenseTensor::new(&[1, 1, 1], &[EK, EW, EB], vec![1.0]).expect("static shape")
}

/// Absorb site `a` (ket and bra) and `w` into a left environment.
pub(crate) fn extend_left(env: &DenseTensor, a: &DenseTensor, w: &DenseTensor) -> Result<DenseTensor, TensorError> {
    let mut t = contract(env, a, &[(EK, LEFT)])?;
    t.relabel(RIGHT, EK)?;
    let mut t = contract(&t, w, &[(EW, WL), (PHYS, IN)])?;
    t.relabel(WR, EW)?;
    let mut t = contract(&t, a, &[(EB, LEFT), (OUT, PHYS)])?;
    t.relabel(RIGHT, EB)?;
    Ok(t)
}

/// Absorb site `b` (ket and bra) and `w` into a right environment.
pub(crate) fn extend_right(env: &DenseTensor, b: &DenseTensor, w: &DenseTensor) -> Result<DenseTensor, TensorError> {
    let mut t = contract(b, env, &[(RIGHT, EK)])?;
    t.relabel(LEFT, EK)?;
    let mut t = contract(&t, w, &[(PHYS, IN), (EW, WR)])?;
    t.relabel(WL, EW)?;
    let mut t = contract(&t, b, &[(EB, RIGHT), (OUT, PHYS)])?;
    t.relabel(LEFT, EB)?;
    Ok(t)
}

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Operator-valued matrix over (left channel, right channel) for one site.
struct SiteBlocks {
    dl: usize,
    dr: usize,
    data: Vec<f64>,
}

impl SiteBlocks {
    fn new(dl: usize, dr: usize) -> Self {
        Self { dl, dr, data: vec![0.0; dl * 4 * dr] }
    }

    fn add(&mut self, wl: usize, wr: usize, coeff: f64, op: &[[f64; 2]; 2]) {
        if coeff == 0.0 {
            return;
        }
        for o in 0..2 {
            for i in 0..2 {
                self.data[((wl * 2 + o) * 2 + i) * self.dr + wr] += coeff * op[o][i];
            }
        }
    }

    fn into_tensor(self) -> MpoResult<DenseTensor> {
        Ok(DenseTensor::new(&[self.dl, 2, 2, self.dr], &[WL, OUT, IN, WR], self.data)?)
    }
}

/// Left-operator index (site, op) packed as `2·site + slot`.
fn op_key(site: usize, op: SpinOp) -> usize {
    2 * site + op.slot()
}

/// Channel basis at one cut: `u[α][j]` weights left operators into
/// channel `j`; `sv[β][j]` weights right operators out of it.
struct CutBasis {
    rank: usize,
    rows: Vec<usize>,
    u: Vec<Vec<f64>>,
    cols: Vec<usize>,
    sv: Vec<Vec<f64>>,
}

impl CutBasis {
    fn u_row(&self, key: usize) -> Option<&[f64]> {
        self.rows.binary_search(&key).ok().map(|r| self.u[r].as_slice())
    }

    fn sv_row(&self, key: usize) -> Option<&[f64]> {
        self.cols.binary_search(&key).ok().map(|c| self.sv[c].as_slice())
    }
}

/// Compile a term list into an MPO, compressing the coupling channels.
pub fn compile(terms: &[OperatorTerm], n: usize, offset: f64, compress_cutoff: f64) -> MpoResult<MatrixProductOperator> {
    build(terms, n, offset, Some(compress_cutoff))
}

/// Exact finite-state-machine MPO with one channel per open left operator.
pub fn compile_uncompressed(terms: &[OperatorTerm], n: usize, offset: f64) -> MpoResult<MatrixProductOperator> {
    build(terms, n, offset, None)
}

/// a·H_x + b·H_z with the offset attached to H_z.
pub fn mix(
    hx_terms: &[OperatorTerm],
    hz_terms: &[OperatorTerm],
    a: f64,
    b: f64,
    offset: f64,
    n: usize,
    compress_cutoff: f64,
) -> MpoResult<MatrixProductOperator> {
    if !a.is_finite() || !b.is_finite() {
        return Err(MpoError::NonFinite);
    }
    let terms: Vec<OperatorTerm> = hx_terms
        .iter()
        .map(|t| t.scaled(a))
        .chain(hz_terms.iter().map(|t| t.scaled(b)))
        .collect();
    compile(&terms, n, offset * b, compress_cutoff)
}

fn build(terms: &[OperatorTerm], n: usize, offset: f64, cutoff: Option<f64>) -> MpoResult<MatrixProductOperator> {
    if n == 0 {
        return Err(MpoError::Empty);
    }
    if !offset.is_finite() {
        return Err(MpoError::NonFinite);
    }
    let mut onsite = vec![[[0.0; 2]; 2]; n];
    // (left key, right key, coefficient), merged below.
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    let mut norm1 = 0.0;
    for (t, term) in terms.iter().enumerate() {
        term.validate(t, n)?;
        norm1 += term.coefficient.abs();
        match term.factors.as_slice() {
            [(site, op)] => {
                let (site, op) = (*site, *op);
                let m = op.matrix();
                for o in 0..2 {
                    for i in 0..2 {
                        onsite[site][o][i] += term.coefficient * m[o][i];
                    }
                }
            }
            [(m, op_m), (k, op_k)] => pairs.push((op_key(*m, *op_m), op_key(*k, *op_k), term.coefficient)),
            _ => unreachable!("validated"),
        }
    }
    pairs.sort_by_key(|x| (x.0, x.1));
    pairs.dedup_by(|later, earlier| {
        if (later.0, later.1) == (earlier.0, earlier.1) {
            earlier.2 += later.2;
            true
        } else {
            false
        }
    });
    pairs.retain(|p| p.2 != 0.0);

    let threshold = cutoff.map(|c| c * norm1);
    let cuts: Vec<CutBasis> = (0..n.saturating_sub(1))
        .map(|k| cut_basis(&pairs, k, threshold))
        .collect::<MpoResult<_>>()?;

    let mut sites = Vec::with_capacity(n);
    for k in 0..n {
        let left = (k > 0).then(|| &cuts[k - 1]);
        let right = (k + 1 < n).then(|| &cuts[k]);
        let dl = left.map_or(1, |c| c.rank + 2);
        let dr = right.map_or(1, |c| c.rank + 2);
        let start_l = 0;
        let finish_l = left.map_or(0, |c| c.rank + 1);
        let start_r = 0;
        let finish_r = right.map_or(0, |c| c.rank + 1);
        let mut blocks = SiteBlocks::new(dl, dr);

        blocks.add(start_l, finish_r, 1.0, &onsite[k]);
        if right.is_some() {
            blocks.add(start_l, start_r, 1.0, &IDENTITY);
        }
        if left.is_some() {
            blocks.add(finish_l, finish_r, 1.0, &IDENTITY);
        }
        if let Some(rc) = right {
            for op in [SpinOp::Sx, SpinOp::Sz] {
                if let Some(row) = rc.u_row(op_key(k, op)) {
                    for (j, &w) in row.iter().enumerate() {
                        blocks.add(start_l, 1 + j, w, &op.matrix());
                    }
                }
            }
        }
        if let Some(lc) = left {
            for op in [SpinOp::Sx, SpinOp::Sz] {
                if let Some(row) = lc.sv_row(op_key(k, op)) {
                    for (i, &w) in row.iter().enumerate() {
                        blocks.add(1 + i, finish_r, w, &op.matrix());
                    }
                }
            }
        }
        if let (Some(lc), Some(rc)) = (left, right) {
            // Carry open terms through this site: T = U_{k−1}ᵀ U_k over
            // left operators that sit before site k.
            for (r, &key) in lc.rows.iter().enumerate() {
                if let Some(urow) = rc.u_row(key) {
                    for (i, &ui) in lc.u[r].iter().enumerate() {
                        for (j, &uj) in urow.iter().enumerate() {
                            blocks.add(1 + i, 1 + j, ui * uj, &IDENTITY);
                        }
                    }
                }
            }
        }
        sites.push(blocks.into_tensor()?);
    }
    Ok(MatrixProductOperator { sites, offset })
}

/// Factor the coefficient block of terms crossing cut `k` (left factor on a
/// site ≤ k, right factor on a site > k).
fn cut_basis(pairs: &[(usize, usize, f64)], k: usize, threshold: Option<f64>) -> MpoResult<CutBasis> {
    let crossing: Vec<&(usize, usize, f64)> =
        pairs.iter().filter(|p| p.0 / 2 <= k && p.1 / 2 > k).collect();
    let mut rows: Vec<usize> = crossing.iter().map(|p| p.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<usize> = crossing.iter().map(|p| p.1).collect();
    cols.sort_unstable();
    cols.dedup();
    if crossing.is_empty() {
        return Ok(CutBasis { rank: 0, rows, u: vec![], cols, sv: vec![] });
    }
    let (nr, nc) = (rows.len(), cols.len());
    let mut m = vec![0.0; nr * nc];
    for p in &crossing {
        let r = rows.binary_search(&p.0).expect("row present");
        let c = cols.binary_search(&p.1).expect("col present");
        m[r * nc + c] += p.2;
    }

    let Some(threshold) = threshold else {
        // One channel per left operator.
        let u = (0..nr).map(|r| (0..nr).map(|j| f64::from(u8::from(r == j))).collect()).collect();
        let sv = (0..nc).map(|c| (0..nr).map(|r| m[r * nc + c]).collect()).collect();
        return Ok(CutBasis { rank: nr, rows, u, cols, sv });
    };

    let t = DenseTensor::new(&[nr, nc], &["alpha", "beta"], m)?;
    let svd = svd_split(&t, &["alpha"], nr.min(nc), 0.0, "chan")?;
    let rank = svd.singular_values.iter().take_while(|&&s| s > threshold).count();
    let full = svd.rank();
    let u = (0..nr)
        .map(|r| svd.left.data()[r * full..r * full + rank].to_vec())
        .collect();
    let vt = svd.right.data();
    let sv = (0..nc)
        .map(|c| (0..rank).map(|j| svd.singular_values[j] * vt[j * nc + c]).collect())
        .collect();
    Ok(CutBasis { rank, rows, u, cols, sv })
}

/// Dense 2ᴺ×2ᴺ matrix of the operator (without offset), for small checks.
pub fn to_dense_matrix(mpo: &MatrixProductOperator) -> DMatrix<f64> {
    let mut acc = DenseTensor::new(&[1, 1, 1, 1], &["wl", "o", "i", "wr"], vec![1.0]).expect("static shape");
    let mut dim = 1;
    for w in &mpo.sites {
        let w = w.clone().with_labels(&["x", "ob", "ib", "wr2"]).expect("rank 4");
        let t = contract(&acc, &w, &[(WR, "x")]).expect("bond extents match");
        let t = t.permute(&["wl", "o", "ob", "i", "ib", "wr2"]).expect("labels present");
        dim *= 2;
        let dl = t.dims()[0];
        let dr = t.dims()[5];
        acc = DenseTensor::new(&[dl, dim, dim, dr], &["wl", "o", "i", "wr"], t.into_data()).expect("same size");
    }
    DMatrix::from_row_slice(dim, dim, acc.data())
}
