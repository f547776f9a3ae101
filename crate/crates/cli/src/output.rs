//! Files written by every run.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hopsweep::drive::RunReport;
use hopsweep::ising::GlassProfile;
use serde::Serialize;

pub const REPORT: &str = "report.json";
pub const TRACE: &str = "trace.csv";
pub const HEATMAP: &str = "heatmap.csv";

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// `step,a,b,energy,sx_total,sz_total`, one row per driving step.
pub fn write_trace(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["step", "a", "b", "energy", "sx_total", "sz_total"])?;
    for s in &report.steps {
        w.serialize((s.step, s.a, s.b, s.energy, s.sx_total, s.sz_total))?;
    }
    w.flush()?;
    Ok(())
}

/// `step,site,sz_value`, the per-site magnetization after every step.
pub fn write_heatmap(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["step", "site", "sz_value"])?;
    for s in &report.steps {
        for (site, v) in s.sz.iter().enumerate() {
            w.serialize((s.step, site, v))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the report wrapper plus trace and heatmap CSVs into `dir`.
pub fn write_run(dir: &Path, summary: &impl Serialize, report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join(REPORT), summary)?;
    write_trace(&dir.join(TRACE), report)?;
    write_heatmap(&dir.join(HEATMAP), report)
}

/// `site,hz` and `d,count,rho` tables plus the profile itself.
pub fn write_profile(dir: &Path, hz: &[f64], profile: &GlassProfile) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("hz.csv"))?;
    w.write_record(["site", "hz"])?;
    for (m, h) in hz.iter().enumerate() {
        w.serialize((m, h))?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("rho.csv"))?;
    w.write_record(["d", "count", "rho"])?;
    for (k, (c, r)) in profile.counts.iter().zip(&profile.rho).enumerate() {
        w.serialize((k + 1, c, r))?;
    }
    w.flush()?;
    write_json(&dir.join("profile.json"), profile)
}
