//! Deterministic report files. Float fields print in Rust's shortest
//! round-trip form, so identical runs produce byte-identical text; anything
//! time-dependent goes into the separate run-meta file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::altproj::{APTrace, Termination};
use crate::error::Result;
use crate::pipeline::{ScenarioRun, SuiteReport};

fn flag_field(e: &crate::estimators::ConstantEstimate) -> String {
    let mut parts = Vec::new();
    if e.flags.no_witness {
        parts.push("no_witness".to_string());
    }
    if e.flags.degenerate {
        parts.push("degenerate".to_string());
    }
    if e.flags.skipped_samples > 0 {
        parts.push(format!("skipped={}", e.flags.skipped_samples));
    }
    parts.join(";")
}

/// One row per estimated constant and radius.
pub fn constants_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("name,rho,value,samples,seed,flags\n");
    for e in run.estimates.all() {
        for rv in &e.per_radius {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.name.as_str(),
                rv.rho,
                rv.value,
                rv.samples,
                e.seed,
                flag_field(e)
            );
        }
    }
    out
}

/// One row per recorded half-step of an alternating-projection trace.
pub fn trace_csv(trace: &APTrace) -> String {
    let dim = trace
        .points
        .first()
        .map(|p| p.x.dim())
        .unwrap_or(0);
    let mut out = String::from("cycle,half_step");
    for i in 0..dim {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",dist_a,dist_b,dist_inter\n");
    for p in &trace.points {
        let _ = write!(out, "{},{}", p.cycle, p.half_step);
        for c in p.x.as_slice() {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{},{},{}", p.dist_a, p.dist_b, p.dist_inter);
    }
    out
}

#[derive(Serialize)]
struct TerminationSidecar<'a> {
    termination: &'a Termination,
    cycles: usize,
    points: usize,
}

pub fn termination_json(trace: &APTrace) -> String {
    let sidecar = TerminationSidecar {
        termination: &trace.termination,
        cycles: trace.cycles,
        points: trace.points.len(),
    };
    serde_json::to_string_pretty(&sidecar).expect("trace types serialize")
}

pub fn scenario_report_json(run: &ScenarioRun) -> String {
    serde_json::to_string_pretty(run).expect("report types serialize")
}

pub fn suite_report_json(suite: &SuiteReport) -> String {
    serde_json::to_string_pretty(suite).expect("report types serialize")
}

/// Writes constants.csv and report.json for one scenario run.
pub fn write_scenario_outputs(dir: &Path, run: &ScenarioRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("constants.csv"), constants_csv(run))?;
    fs::write(dir.join("report.json"), scenario_report_json(run))?;
    Ok(())
}

/// Writes the suite report plus one constants CSV per scenario.
pub fn write_suite_outputs(dir: &Path, suite: &SuiteReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("suite_report.json"), suite_report_json(suite))?;
    for run in &suite.scenarios {
        let name = format!("{}_constants.csv", run.estimates.label);
        fs::write(dir.join(name), constants_csv(run))?;
    }
    Ok(())
}

/// Writes trace.csv and termination.json for one projection trace.
pub fn write_trace_outputs(dir: &Path, trace: &APTrace) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trace.csv"), trace_csv(trace))?;
    fs::write(dir.join("termination.json"), termination_json(trace))?;
    Ok(())
}

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'a str,
    seed: u64,
    unix_time: u64,
}

/// The only time-stamped output; kept apart so every other file is
/// reproducible byte for byte.
pub fn write_run_meta(dir: &Path, tool: &str, seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = RunMeta {
        tool,
        seed,
        unix_time,
    };
    fs::write(
        dir.join("run_meta.json"),
        serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )?;
    Ok(())
}
