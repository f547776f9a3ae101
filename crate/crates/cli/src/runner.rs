//! Restart attempts spread over a worker pool.

use std::sync::Mutex;
use std::time::Instant;

use anyhow::Result;
use hopsweep::drive::{assemble_report, run_attempt, Attempt, Problem, RunReport, StepRecord};
use hopsweep::ising::IsingModel;
use rayon::prelude::*;

use crate::config::RunConfig;

fn progress(verbose: bool) -> impl Fn(usize, &StepRecord) + Sync {
    move |restart, s| {
        if verbose {
            eprintln!(
                "restart {restart} step {:>3}  a={:.3}  E={:.6}  Sx={:.4}  Sz={:.4}  D={}  {:.1}s",
                s.step, s.a, s.energy, s.sx_total, s.sz_total, s.bond_after, s.wall_seconds
            );
        }
    }
}

/// Runs attempts in batches of `config.jobs` until one reaches the target or
/// the restart budget is spent. The report equals the sequential one apart
/// from timings.
pub fn solve(model: &IsingModel, config: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let params = &config.drive;
    let problem = Problem::new(model, params)?;
    let budget = if params.target_energy.is_some() { params.max_restarts } else { 0 };
    let report = progress(config.verbose);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let stderr = Mutex::new(());

    let mut attempts: Vec<Attempt> = Vec::new();
    let mut next = 0;
    while next <= budget {
        let batch: Vec<usize> = (next..=budget).take(config.jobs).collect();
        next += batch.len();
        let results: Vec<_> = pool.install(|| {
            batch
                .par_iter()
                .map(|&r| {
                    run_attempt(&problem, params, r, &mut |restart, step| {
                        let _guard = stderr.lock();
                        report(restart, step);
                    })
                })
                .collect()
        });
        for r in results {
            attempts.push(r?);
        }
        if attempts.iter().any(|a| a.reached_target == Some(true)) {
            break;
        }
    }
    Ok(assemble_report(&problem, params, attempts, started.elapsed().as_secs_f64()))
}
