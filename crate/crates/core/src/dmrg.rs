//! Two-site DMRG.
//!
//! A sweep visits every bond left to right and then right to left. At each
//! bond the two-site tensor is replaced by the lowest eigenvector of the
//! effective Hamiltonian (restarted Lanczos, applied implicitly through the
//! cached environments) and split back with a truncated SVD. Environments
//! are extended one site at a time as the sweep moves.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mpo::{boundary_env, extend_left, extend_right, MatrixProductOperator, EB, EK, EW, IN, OUT, WL, WR};
use crate::mps::{MatrixProductState, MpsError, LEFT, PHYS, RIGHT};
use crate::tensor::{contract, gemm, svd_split, DenseTensor, TensorError, DEFAULT_CUTOFF};

#[derive(Debug, Error)]
pub enum DmrgError {
    #[error("invalid sweep parameters: {0}")]
    InvalidParams(String),
    #[error("state has {state} sites but operator has {mpo}")]
    LengthMismatch { state: usize, mpo: usize },
    #[error("eigensolver: starting vector is zero")]
    ZeroGuess,
    #[error("eigensolver: non-finite value encountered")]
    NonFinite,
    #[error("eigensolver failed at bond ({bond}, {next}): {source}", next = bond + 1)]
    AtBond {
        bond: usize,
        #[source]
        source: Box<DmrgError>,
    },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Mps(#[from] MpsError),
}

pub type DmrgResult<T> = Result<T, DmrgError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    /// Bond dimension cap D.
    pub max_bond: usize,
    /// Discarded-weight threshold for the SVD split.
    pub cutoff: f64,
    pub krylov_dim: usize,
    pub eig_tol: f64,
    pub nsweeps: usize,
    /// Lanczos restarts per bond update.
    pub eig_max_iter: usize,
    /// Stop once successive sweep energies agree to `eig_tol·max(1, |E|)`.
    pub early_exit: bool,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            max_bond: 30,
            cutoff: DEFAULT_CUTOFF,
            krylov_dim: 4,
            eig_tol: 1e-14,
            nsweeps: 5,
            eig_max_iter: 3,
            early_exit: false,
        }
    }
}

impl SweepParams {
    pub fn validate(&self) -> DmrgResult<()> {
        let bad = |m: &str| Err(DmrgError::InvalidParams(m.to_string()));
        if self.max_bond == 0 {
            return bad("max_bond must be at least 1");
        }
        if !(self.cutoff >= 0.0) {
            return bad("cutoff must be nonnegative");
        }
        if self.krylov_dim < 2 {
            return bad("krylov_dim must be at least 2");
        }
        if !(self.eig_tol >= 0.0) {
            return bad("eig_tol must be nonnegative");
        }
        if self.nsweeps == 0 {
            return bad("nsweeps must be at least 1");
        }
        if self.eig_max_iter == 0 {
            return bad("eig_max_iter must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub state: MatrixProductState,
    /// ⟨ψ|H|ψ⟩ including the operator offset.
    pub energy: f64,
    pub energy_history: Vec<f64>,
    pub max_bond_reached: usize,
    pub max_truncation_error: f64,
    pub converged: bool,
    pub sweep_seconds: Vec<f64>,
}

/// A real symmetric operator known only through its action.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Dense matrix as an operator, for tests and tiny problems.
pub struct DenseOperator(pub DMatrix<f64>);

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..n).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
///
/// Each restart builds a Krylov space of at most `krylov_dim` vectors from
/// the current estimate; the loop ends when the residual drops to
/// `eig_tol` or after `max_iter` restarts. Returns (λ, v, ‖Hv − λv‖).
pub fn lanczos<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    guess: &[f64],
    krylov_dim: usize,
    eig_tol: f64,
    max_iter: usize,
) -> DmrgResult<(f64, Vec<f64>, f64)> {
    let dim = op.dim();
    let g = norm(guess);
    if !g.is_finite() {
        return Err(DmrgError::NonFinite);
    }
    if g == 0.0 {
        return Err(DmrgError::ZeroGuess);
    }
    let mut x: Vec<f64> = guess.iter().map(|v| v / g).collect();
    let mut theta = f64::NAN;
    let mut residual = f64::INFINITY;
    let kmax = krylov_dim.min(dim).max(1);

    for _ in 0..max_iter.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        let mut w = vec![0.0; dim];
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            if w.iter().any(|v| !v.is_finite()) {
                return Err(DmrgError::NonFinite);
            }
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
            }
            let bnext = norm(&w);
            beta.push(bnext);
            let scale = alpha.iter().map(|a| a.abs()).fold(1e-300, f64::max);
            if basis.len() == kmax || bnext <= 1e-13 * scale {
                break;
            }
            basis.push(w.iter().map(|v| v / bnext).collect());
        }

        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, &lmin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty spectrum");
        let y = eig.eigenvectors.column(imin);
        let mut next = vec![0.0; dim];
        for (c, b) in y.iter().zip(&basis) {
            for (ni, bi) in next.iter_mut().zip(b) {
                *ni += c * bi;
            }
        }
        let nn = norm(&next);
        if !nn.is_finite() || nn == 0.0 {
            return Err(DmrgError::NonFinite);
        }
        next.iter_mut().for_each(|v| *v /= nn);
        x = next;
        theta = lmin;
        residual = beta[k - 1] * y[k - 1].abs();
        if residual <= eig_tol {
            break;
        }
    }
    Ok((theta, x, residual))
}

/// [`lanczos`] on a tensor-shaped vector; the eigenvector keeps the
/// guess's dims and labels.
pub fn local_eigensolve<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    guess: &DenseTensor,
    krylov_dim: usize,
    eig_tol: f64,
    max_iter: usize,
) -> DmrgResult<(f64, DenseTensor)> {
    let (lambda, v, _) = lanczos(op, guess.data(), krylov_dim, eig_tol, max_iter)?;
    Ok((lambda, guess.with_data(v)?))
}

/// Effective Hamiltonian of bond (k, k+1) acting on θ[a, s₁, s₂, b].
struct TwoSiteOperator {
    dl: usize,
    dr: usize,
    wm: usize,
    /// (L·W₁) laid out as [eb, o₁, wm | ek, i₁].
    lw: Vec<f64>,
    /// (W₂·R) laid out as [wm, i₂, ek | o₂, eb].
    wr: Vec<f64>,
}

impl TwoSiteOperator {
    fn new(left: &DenseTensor, w1: &DenseTensor, w2: &DenseTensor, right: &DenseTensor) -> DmrgResult<Self> {
        let lw = contract(left, w1, &[(EW, WL)])?.permute(&[EB, OUT, WR, EK, IN])?;
        let wr = contract(w2, right, &[(WR, EW)])?.permute(&[WL, IN, EK, OUT, EB])?;
        Ok(Self {
            dl: left.dims()[0],
            dr: right.dims()[0],
            wm: w1.dims()[3],
            lw: lw.into_data(),
            wr: wr.into_data(),
        })
    }
}

impl SymmetricOperator for TwoSiteOperator {
    fn dim(&self) -> usize {
        self.dl * 4 * self.dr
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (dl, dr, wm) = (self.dl, self.dr, self.wm);
        let mut mid = vec![0.0; dl * 2 * wm * 2 * dr];
        gemm(dl * 2 * wm, dl * 2, 2 * dr, &self.lw, x, &mut mid);
        gemm(dl * 2, wm * 2 * dr, 2 * dr, &mid, &self.wr, y);
    }
}

fn two_site_tensor(a: &DenseTensor, b: &DenseTensor) -> DmrgResult<DenseTensor> {
    let (dl, dm, dr) = (a.dims()[0], a.dims()[2], b.dims()[2]);
    let mut data = vec![0.0; dl * 4 * dr];
    gemm(dl * 2, dm, 2 * dr, a.data(), b.data(), &mut data);
    Ok(DenseTensor::new(&[dl, 2, 2, dr], &[LEFT, "p1", "p2", RIGHT], data)?)
}

struct Split {
    left: DenseTensor,
    right: DenseTensor,
    truncation_error: f64,
}

/// Split θ into two site tensors, leaving the (renormalized) weights on the
/// side the sweep is heading towards.
fn split_two_site(theta: &DenseTensor, params: &SweepParams, weights_right: bool) -> DmrgResult<Split> {
    let svd = svd_split(theta, &[LEFT, "p1"], params.max_bond, params.cutoff, "bond")?;
    let kept: f64 = svd.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt();
    let renorm: Vec<f64> = svd.singular_values.iter().map(|s| s / kept).collect();
    let weighted = crate::tensor::SvdResult { singular_values: renorm, ..svd.clone() };
    let (left, right) = if weights_right {
        (svd.left, weighted.weighted_right())
    } else {
        (weighted.weighted_left(), svd.right)
    };
    let left = left.with_labels(&[LEFT, PHYS, RIGHT])?;
    let right = right.with_labels(&[LEFT, PHYS, RIGHT])?;
    Ok(Split { left, right, truncation_error: svd.truncation_error })
}

fn at_bond(bond: usize) -> impl FnOnce(DmrgError) -> DmrgError {
    move |e| DmrgError::AtBond { bond, source: Box::new(e) }
}

/// Exact lowest eigenvector of a single-site chain.
fn solve_single_site(state: &MatrixProductState, mpo: &MatrixProductOperator) -> DmrgResult<(MatrixProductState, f64)> {
    let w = mpo.site(0).data();
    let m = DMatrix::from_fn(2, 2, |o, i| w[o * 2 + i]);
    let eig = SymmetricEigen::new(m);
    let imin = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(imin);
    // Keep the sign of the incoming state where possible.
    let sign = if v[0] * state.site(0).data()[0] + v[1] * state.site(0).data()[1] < 0.0 { -1.0 } else { 1.0 };
    let site = DenseTensor::new(&[1, 2, 1], &[LEFT, PHYS, RIGHT], vec![sign * v[0], sign * v[1]])?;
    Ok((MatrixProductState::from_sites(vec![site])?, eig.eigenvalues[imin] + mpo.offset()))
}

struct SweepStats {
    energy: f64,
    max_bond: usize,
    truncation_error: f64,
}

/// One left-to-right-to-left pass over all bonds.
pub fn sweep(state: &MatrixProductState, mpo: &MatrixProductOperator, params: &SweepParams) -> DmrgResult<SweepOutcome> {
    params.validate()?;
    let mut state = state.canonicalize(0)?;
    check_lengths(&state, mpo)?;
    let started = Instant::now();
    let stats = sweep_in_place(&mut state, mpo, params)?;
    Ok(SweepOutcome {
        energy: stats.energy,
        energy_history: vec![stats.energy],
        max_bond_reached: stats.max_bond,
        max_truncation_error: stats.truncation_error,
        converged: false,
        sweep_seconds: vec![started.elapsed().as_secs_f64()],
        state,
    })
}

fn check_lengths(state: &MatrixProductState, mpo: &MatrixProductOperator) -> DmrgResult<()> {
    if state.len() != mpo.len() {
        return Err(DmrgError::LengthMismatch { state: state.len(), mpo: mpo.len() });
    }
    Ok(())
}

/// Runs one sweep on a state centered at site 0; leaves it centered at 0.
fn sweep_in_place(state: &mut MatrixProductState, mpo: &MatrixProductOperator, params: &SweepParams) -> DmrgResult<SweepStats> {
    let n = state.len();
    if n == 1 {
        let (s, e) = solve_single_site(state, mpo)?;
        *state = s;
        return Ok(SweepStats { energy: e, max_bond: 1, truncation_error: 0.0 });
    }
    let mut max_bond = state.max_bond();
    let mut truncation_error: f64 = 0.0;

    let mut right_env: Vec<Option<DenseTensor>> = vec![None; n];
    right_env[n - 1] = Some(boundary_env());
    for k in (1..n).rev() {
        let env = extend_right(right_env[k].as_ref().expect("filled"), state.site(k), mpo.site(k))?;
        right_env[k - 1] = Some(env);
    }
    let mut left_env: Vec<Option<DenseTensor>> = vec![None; n];
    left_env[0] = Some(boundary_env());

    let mut update = |state: &mut MatrixProductState,
                      left_env: &[Option<DenseTensor>],
                      right_env: &[Option<DenseTensor>],
                      k: usize,
                      moving_right: bool|
     -> DmrgResult<()> {
        let op = TwoSiteOperator::new(
            left_env[k].as_ref().expect("left environment ready"),
            mpo.site(k),
            mpo.site(k + 1),
            right_env[k + 1].as_ref().expect("right environment ready"),
        )?;
        let theta = two_site_tensor(state.site(k), state.site(k + 1))?;
        let (_, theta) = local_eigensolve(&op, &theta, params.krylov_dim, params.eig_tol, params.eig_max_iter)
            .map_err(at_bond(k))?;
        let split = split_two_site(&theta, params, moving_right)?;
        max_bond = max_bond.max(split.left.dims()[2]);
        truncation_error = truncation_error.max(split.truncation_error);
        let center = if moving_right { k + 1 } else { k };
        state.set_pair(k, split.left, split.right, center);
        Ok(())
    };

    for k in 0..n - 1 {
        update(state, &left_env, &right_env, k, true)?;
        let env = extend_left(left_env[k].as_ref().expect("filled"), state.site(k), mpo.site(k))?;
        left_env[k + 1] = Some(env);
    }
    for k in (0..n - 1).rev() {
        update(state, &left_env, &right_env, k, false)?;
        let env = extend_right(right_env[k + 1].as_ref().expect("filled"), state.site(k + 1), mpo.site(k + 1))?;
        right_env[k] = Some(env);
    }

    // ⟨ψ|H|ψ⟩ of the truncated state, closing the chain at site 0.
    let closed = extend_left(&boundary_env(), state.site(0), mpo.site(0))?;
    let r0 = right_env[0].as_ref().expect("filled");
    let value = contract(&closed, r0, &[(EK, EK), (EW, EW), (EB, EB)])?.data()[0];
    let energy = value / state.norm().powi(2) + mpo.offset();
    Ok(SweepStats { energy, max_bond, truncation_error })
}

/// `params.nsweeps` sweeps, optionally stopping early once the energy settles.
pub fn run(state: &MatrixProductState, mpo: &MatrixProductOperator, params: &SweepParams) -> DmrgResult<SweepOutcome> {
    params.validate()?;
    check_lengths(state, mpo)?;
    let mut state = state.canonicalize(0)?;
    let mut history = Vec::with_capacity(params.nsweeps);
    let mut seconds = Vec::with_capacity(params.nsweeps);
    let mut max_bond = state.max_bond();
    let mut truncation_error: f64 = 0.0;
    let mut converged = false;
    for _ in 0..params.nsweeps {
        let started = Instant::now();
        let stats = sweep_in_place(&mut state, mpo, params)?;
        seconds.push(started.elapsed().as_secs_f64());
        max_bond = max_bond.max(stats.max_bond);
        truncation_error = truncation_error.max(stats.truncation_error);
        if let Some(&prev) = history.last() {
            let prev: f64 = prev;
            converged = (prev - stats.energy).abs() < params.eig_tol * stats.energy.abs().max(1.0);
        }
        history.push(stats.energy);
        if converged && params.early_exit {
            break;
        }
    }
    Ok(SweepOutcome {
        energy: *history.last().expect("at least one sweep"),
        energy_history: history,
        max_bond_reached: max_bond,
        max_truncation_error: truncation_error,
        converged,
        sweep_seconds: seconds,
        state,
    })
}
