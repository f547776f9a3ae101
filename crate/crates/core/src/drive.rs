//! The discrete driving schedule.
//!
//! Starting from a simple state, the solver walks through `M` Hamiltonians
//! `H_i = a_i·H_x + b_i·H_z` with `b_i = i/M`, `a_i = 1 − b_i`, where `H_x`
//! is a (possibly noisy) transverse field and `H_z` is the Ising model. At
//! each step the previous state seeds a DMRG run. After the last step
//! (`a = 0`) the state is read out spin by spin and its classical energy is
//! recomputed from the model.
//!
//! If a target energy is set and missed, the whole schedule restarts from a
//! fresh random state. Restart `r` draws its initial state and its noise from
//! ChaCha8 streams derived from `(seed, r)`, so every attempt is reproducible
//! on its own.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dmrg::{self, DmrgError, SweepParams};
use crate::ising::{ising_energy, to_operator_terms, IsingError, IsingModel};
use crate::mpo::{mix, MatrixProductOperator, MpoError, OperatorTerm, SpinOp, DEFAULT_COMPRESS_CUTOFF};
use crate::mps::{minus_product_state, random_mps_with, MatrixProductState, MpsError, SpinConfiguration, SZ};

#[derive(Debug, Error)]
pub enum DriveError {
    #[error("invalid drive parameters: {0}")]
    InvalidParams(String),
    #[error("model has no spins")]
    EmptyModel,
    #[error("restart {restart}, step {step}: {source}")]
    Step {
        restart: usize,
        step: usize,
        #[source]
        source: DmrgError,
    },
    #[error(transparent)]
    Mpo(#[from] MpoError),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Ising(#[from] IsingError),
}

pub type DriveResult<T> = Result<T, DriveError>;

/// Initial state of the first attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitState {
    /// |−⟩ on every site, the ground state of the pure transverse field.
    Minus,
    /// Random state with the given bond dimension.
    Random(usize),
}

impl fmt::Display for InitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitState::Minus => f.write_str("minus"),
            InitState::Random(d) => write!(f, "random:{d}"),
        }
    }
}

impl FromStr for InitState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minus" => Ok(InitState::Minus),
            "random" => Ok(InitState::Random(3)),
            _ => {
                let d = s
                    .strip_prefix("random:")
                    .ok_or_else(|| format!("unknown initial state `{s}` (expected minus or random:D)"))?;
                let d: usize = d.parse().map_err(|_| format!("bad bond dimension in `{s}`"))?;
                if d == 0 {
                    return Err("random initial bond dimension must be at least 1".into());
                }
                Ok(InitState::Random(d))
            }
        }
    }
}

impl TryFrom<String> for InitState {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<InitState> for String {
    fn from(s: InitState) -> Self {
        s.to_string()
    }
}

/// When the transverse-field noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePolicy {
    PerStep,
    PerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveParams {
    /// Number of driving steps M.
    pub m_steps: usize,
    pub hx: f64,
    /// Half-width of the uniform noise added to each site's field.
    pub eta: f64,
    pub noise: NoisePolicy,
    pub sweep: SweepParams,
    pub init: InitState,
    /// Bond dimension of the random state used by restarts.
    pub restart_bond: usize,
    pub seed: u64,
    pub max_restarts: usize,
    pub target_energy: Option<f64>,
    /// Divide the model by its largest |coupling| before solving.
    pub rescale: bool,
    pub compress_cutoff: f64,
    /// Up-spin count of the known ground state; offsets the Sᶻ trace.
    pub n_up_ground: Option<usize>,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self {
            m_steps: 10,
            hx: 1.0,
            eta: 0.0,
            noise: NoisePolicy::PerStep,
            sweep: SweepParams::default(),
            init: InitState::Minus,
            restart_bond: 3,
            seed: 0,
            max_restarts: 0,
            target_energy: None,
            rescale: false,
            compress_cutoff: DEFAULT_COMPRESS_CUTOFF,
            n_up_ground: None,
        }
    }
}

impl DriveParams {
    pub fn validate(&self) -> DriveResult<()> {
        let bad = |m: &str| Err(DriveError::InvalidParams(m.to_string()));
        if self.m_steps < 2 {
            return bad("m_steps must be at least 2");
        }
        if !self.hx.is_finite() {
            return bad("hx must be finite");
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return bad("eta must be finite and nonnegative");
        }
        if self.restart_bond == 0 {
            return bad("restart_bond must be at least 1");
        }
        if !(self.compress_cutoff >= 0.0) {
            return bad("compress_cutoff must be nonnegative");
        }
        if let Some(t) = self.target_energy {
            if !t.is_finite() {
                return bad("target_energy must be finite");
            }
        }
        self.sweep.validate().map_err(|e| DriveError::InvalidParams(e.to_string()))
    }
}

/// (a_i, b_i) for i = 1..M with b_i = i/M.
pub fn linear_schedule(m_steps: usize) -> DriveResult<Vec<(f64, f64)>> {
    if m_steps < 2 {
        return Err(DriveError::InvalidParams("m_steps must be at least 2".into()));
    }
    Ok((1..=m_steps)
        .map(|i| {
            let b = i as f64 / m_steps as f64;
            (1.0 - b, b)
        })
        .collect())
}

/// hx + η_m with η_m uniform in (−eta, eta).
pub fn noisy_transverse_field<R: Rng + ?Sized>(n: usize, hx: f64, eta: f64, rng: &mut R) -> Vec<f64> {
    if eta == 0.0 {
        return vec![hx; n];
    }
    (0..n).map(|_| hx + rng.gen_range(-eta..eta)).collect()
}

#[derive(Debug, Clone, Copy)]
enum Stream {
    StateInit = 1,
    Noise = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of attempt `restart`; attempt 0 uses the base seed itself.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    if restart == 0 {
        seed
    } else {
        splitmix64(seed ^ splitmix64(restart as u64))
    }
}

fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub a: f64,
    pub b: f64,
    /// ⟨ψ_i|H_i|ψ_i⟩ in the units of the input model.
    pub energy: f64,
    pub sx_total: f64,
    pub sz_total: f64,
    pub sz: Vec<f64>,
    pub max_bond: usize,
    pub bond_after: usize,
    pub sweeps: usize,
    pub truncation_error: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub restart: usize,
    pub seed: u64,
    pub init: InitState,
    pub steps: Vec<StepRecord>,
    pub configuration: SpinConfiguration,
    /// Classical energy of `configuration` under the unscaled model.
    pub energy: f64,
    pub final_mps_energy: f64,
    pub final_bond: usize,
    pub reached_target: Option<bool>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub restart: usize,
    pub seed: u64,
    pub energy: f64,
    pub reached_target: Option<bool>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_spins: usize,
    pub params: DriveParams,
    pub seed: u64,
    /// Restarts actually used (attempts − 1).
    pub restarts: usize,
    /// Restart index of the reported attempt.
    pub best_restart: usize,
    pub rescale_factor: f64,
    pub steps: Vec<StepRecord>,
    pub final_configuration: SpinConfiguration,
    pub final_energy: f64,
    pub final_mps_energy: f64,
    pub final_bond: usize,
    /// False when a target was set and no attempt reached it.
    pub converged: bool,
    pub reached_target: Option<bool>,
    pub attempts: Vec<AttemptSummary>,
    pub wall_seconds: f64,
}

impl RunReport {
    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_seconds = 0.0;
        r.steps.iter_mut().for_each(|s| s.wall_seconds = 0.0);
        r.attempts.iter_mut().for_each(|a| a.wall_seconds = 0.0);
        r
    }
}

/// (energy via the MPO, Σ⟨Sˣ⟩, offset Σ⟨Sᶻ⟩, per-site ⟨Sᶻ⟩).
pub fn trace_observables(
    state: &MatrixProductState,
    mpo: &MatrixProductOperator,
    n_up_ground: Option<usize>,
) -> DriveResult<(f64, f64, f64, Vec<f64>)> {
    let energy = mpo.expectation(state)?;
    let (sx, sz_total) = state.total_spin_traces(n_up_ground)?;
    let sz = state.expect_all(&SZ)?;
    Ok((energy, sx, sz_total, sz))
}

fn reached(energy: f64, target: Option<f64>) -> Option<bool> {
    target.map(|t| energy <= t + 1e-9 * t.abs().max(1.0))
}

/// Prepared Hamiltonian pieces shared by all attempts.
pub struct Problem<'a> {
    model: &'a IsingModel,
    hz_terms: Vec<OperatorTerm>,
    constant: f64,
    factor: f64,
    base_field: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(model: &'a IsingModel, params: &DriveParams) -> DriveResult<Self> {
        params.validate()?;
        if model.n() == 0 {
            return Err(DriveError::EmptyModel);
        }
        let (working, factor) = if params.rescale && model.max_abs_coupling() > 0.0 {
            let f = model.max_abs_coupling();
            (model.scaled(1.0 / f), f)
        } else {
            (model.clone(), 1.0)
        };
        let (fields, couplings, constant) = to_operator_terms(&working);
        let base_field = if model.hx_base.iter().any(|&h| h != 0.0) {
            model.hx_base.clone()
        } else {
            vec![params.hx; model.n()]
        };
        Ok(Self { model, hz_terms: fields.into_iter().chain(couplings).collect(), constant, factor, base_field })
    }

    pub fn rescale_factor(&self) -> f64 {
        self.factor
    }
}

fn noisy_fields(base: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    base.iter().map(|&h| noisy_transverse_field(1, h, eta, rng)[0]).collect()
}

/// One pass through the schedule for restart index `restart`.
pub fn run_attempt(
    problem: &Problem<'_>,
    params: &DriveParams,
    restart: usize,
    observer: &mut dyn FnMut(usize, &StepRecord),
) -> DriveResult<Attempt> {
    let started = Instant::now();
    let n = problem.model.n();
    let seed = restart_seed(params.seed, restart);
    let init = if restart == 0 { params.init } else { InitState::Random(params.restart_bond) };
    let mut state = match init {
        InitState::Minus => minus_product_state(n)?,
        InitState::Random(d) => random_mps_with(n, d, &mut stream_rng(seed, Stream::StateInit))?,
    };
    let mut noise_rng = stream_rng(seed, Stream::Noise);
    let run_field = noisy_fields(&problem.base_field, params.eta, &mut noise_rng);

    let mut steps = Vec::with_capacity(params.m_steps);
    let mut last_mpo = None;
    for (i, (a, b)) in linear_schedule(params.m_steps)?.into_iter().enumerate() {
        let step_started = Instant::now();
        let field = match params.noise {
            NoisePolicy::PerStep => noisy_fields(&problem.base_field, params.eta, &mut noise_rng),
            NoisePolicy::PerRun => run_field.clone(),
        };
        let hx_terms: Vec<OperatorTerm> = field
            .iter()
            .enumerate()
            .filter(|(_, &h)| h != 0.0)
            .map(|(m, &h)| OperatorTerm::single(h, m, SpinOp::Sx))
            .collect();
        let mpo = mix(&hx_terms, &problem.hz_terms, a, b, problem.constant, n, params.compress_cutoff)?;
        let out = dmrg::run(&state, &mpo, &params.sweep)
            .map_err(|source| DriveError::Step { restart, step: i + 1, source })?;
        state = out.state;
        let (energy, sx_total, sz_total, sz) = trace_observables(&state, &mpo, params.n_up_ground)?;
        let record = StepRecord {
            step: i + 1,
            a,
            b,
            energy: energy * problem.factor,
            sx_total,
            sz_total,
            sz,
            max_bond: out.max_bond_reached,
            bond_after: state.max_bond(),
            sweeps: out.energy_history.len(),
            truncation_error: out.max_truncation_error,
            wall_seconds: step_started.elapsed().as_secs_f64(),
        };
        observer(restart, &record);
        steps.push(record);
        last_mpo = Some(mpo);
    }

    let configuration = state.readout()?;
    let energy = ising_energy(problem.model, &configuration)?;
    let final_mps_energy = last_mpo.expect("at least two steps").expectation(&state)? * problem.factor;
    Ok(Attempt {
        restart,
        seed,
        init,
        steps,
        reached_target: reached(energy, params.target_energy),
        configuration,
        energy,
        final_mps_energy,
        final_bond: state.max_bond(),
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Combine attempts (in restart order) into a report. The first attempt
/// that reaches the target wins; otherwise the lowest energy, earliest first.
pub fn assemble_report(problem: &Problem<'_>, params: &DriveParams, attempts: Vec<Attempt>, wall_seconds: f64) -> RunReport {
    assert!(!attempts.is_empty(), "at least one attempt");
    let winner = attempts
        .iter()
        .position(|a| a.reached_target == Some(true))
        .unwrap_or_else(|| {
            let mut best = 0;
            for (k, a) in attempts.iter().enumerate() {
                if a.energy < attempts[best].energy {
                    best = k;
                }
            }
            best
        });
    let used = match attempts.iter().position(|a| a.reached_target == Some(true)) {
        Some(k) => k + 1,
        None => attempts.len(),
    };
    let summaries = attempts[..used]
        .iter()
        .map(|a| AttemptSummary {
            restart: a.restart,
            seed: a.seed,
            energy: a.energy,
            reached_target: a.reached_target,
            wall_seconds: a.wall_seconds,
        })
        .collect();
    let best = attempts.into_iter().nth(winner).expect("index in range");
    RunReport {
        n_spins: problem.model.n(),
        params: params.clone(),
        seed: params.seed,
        restarts: used - 1,
        best_restart: best.restart,
        rescale_factor: problem.factor,
        steps: best.steps,
        converged: best.reached_target != Some(false),
        reached_target: best.reached_target,
        final_configuration: best.configuration,
        final_energy: best.energy,
        final_mps_energy: best.final_mps_energy,
        final_bond: best.final_bond,
        attempts: summaries,
        wall_seconds,
    }
}

pub fn solve(model: &IsingModel, params: &DriveParams) -> DriveResult<RunReport> {
    solve_observed(model, params, &mut |_, _| {})
}

/// [`solve`] with a callback after every driving step.
pub fn solve_observed(
    model: &IsingModel,
    params: &DriveParams,
    observer: &mut dyn FnMut(usize, &StepRecord),
) -> DriveResult<RunReport> {
    let started = Instant::now();
    let problem = Problem::new(model, params)?;
    let budget = if params.target_energy.is_some() { params.max_restarts } else { 0 };
    let mut attempts = Vec::new();
    for restart in 0..=budget {
        let attempt = run_attempt(&problem, params, restart, observer)?;
        let done = attempt.reached_target == Some(true);
        attempts.push(attempt);
        if done {
            break;
        }
    }
    Ok(assemble_report(&problem, params, attempts, started.elapsed().as_secs_f64()))
}
