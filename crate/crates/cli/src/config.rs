//! Run configuration: command defaults, then a JSON file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use hopsweep::drive::{DriveParams, InitState, NoisePolicy};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "HOPSWEEP_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub drive: DriveParams,
    /// Worker threads for restart attempts.
    pub jobs: usize,
    pub out: Option<PathBuf>,
    /// Known optimum to compare against.
    pub reference: Option<f64>,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { drive: DriveParams::default(), jobs: 1, out: None, reference: None, verbose: false }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        Ok(())
    }

    /// Output directory: explicit setting, then the environment, then `hopsweep-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("hopsweep-out"))
    }
}

/// Solver flags shared by the `sudoku` and `maxcut` commands.
#[derive(Debug, Clone, Default, Args)]
pub struct SolveArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of driving steps M.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Transverse field strength.
    #[arg(long)]
    pub hx: Option<f64>,
    /// Half-width of the uniform noise on the transverse field.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Redraw the noise every step or once per run.
    #[arg(long, value_parser = parse_noise)]
    pub noise: Option<NoisePolicy>,
    /// Maximum bond dimension D.
    #[arg(long)]
    pub bond_dim: Option<usize>,
    /// DMRG sweeps per driving step.
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restarts allowed after the first attempt when a target is set.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub target_energy: Option<f64>,
    /// Divide the model by its largest coupling before solving.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub rescale: Option<bool>,
    /// Initial state: `minus`, `random` or `random:D`.
    #[arg(long)]
    pub init: Option<InitState>,
    /// Stop sweeping within a step once the energy settles.
    #[arg(long)]
    pub early_exit: bool,
    /// Worker threads for restart attempts.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Known optimum energy to compare against.
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<f64>,
    /// Print per-step progress to stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

fn parse_noise(s: &str) -> Result<NoisePolicy, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("expected per-step or per-run, got `{s}`"))
}

/// Recursively overlay `patch` onto `base`.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub fn load_file(defaults: &RunConfig, path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let patch: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut value = serde_json::to_value(defaults)?;
    merge(&mut value, patch);
    serde_json::from_value(value).with_context(|| format!("invalid configuration in {}", path.display()))
}

impl SolveArgs {
    pub fn resolve(&self, defaults: RunConfig) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => load_file(&defaults, path)?,
            None => defaults,
        };
        let d = &mut c.drive;
        if let Some(v) = self.steps {
            d.m_steps = v;
        }
        if let Some(v) = self.hx {
            d.hx = v;
        }
        if let Some(v) = self.eta {
            d.eta = v;
        }
        if let Some(v) = self.noise {
            d.noise = v;
        }
        if let Some(v) = self.bond_dim {
            d.sweep.max_bond = v;
        }
        if let Some(v) = self.sweeps {
            d.sweep.nsweeps = v;
        }
        if let Some(v) = self.seed {
            d.seed = v;
        }
        if let Some(v) = self.restarts {
            d.max_restarts = v;
        }
        if let Some(v) = self.target_energy {
            d.target_energy = Some(v);
        }
        if let Some(v) = self.rescale {
            d.rescale = v;
        }
        if let Some(v) = self.init {
            d.init = v;
        }
        if self.early_exit {
            d.sweep.early_exit = true;
        }
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        if let Some(v) = &self.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = self.reference {
            c.reference = Some(v);
        }
        c.verbose |= self.verbose;
        c.validate()?;
        Ok(c)
    }
}
