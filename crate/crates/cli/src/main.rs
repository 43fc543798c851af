//! Command-line front end: load scenarios, run the estimators and the
//! alternating-projection engine, and write CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 runtime
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tlab_core::altproj::{detect_stall, fit_linear_rate, run_alternating_projections};
use tlab_core::estimators::EstimatorParams;
use tlab_core::pipeline::{run_scenario, run_suite, ScenarioRun};
use tlab_core::report::{
    write_run_meta, write_scenario_outputs, write_suite_outputs, write_trace_outputs,
};
use tlab_core::scenario::{battery, load_scenario, save_scenario, PairScenario};
use tlab_core::sets::RadiusSchedule;
use tlab_core::{Error, RealVector};

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tlab",
    about = "Estimates transversality constants of set pairs, runs alternating \
             projections, and verifies the identities tying the constants together."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate every constant for one scenario; writes constants.csv and report.json.
    Estimate(ScenarioCmd),
    /// Estimate one scenario and exit 1 when any verification check fails.
    Verify(ScenarioCmd),
    /// Run alternating projections; writes trace.csv and termination.json.
    Altproj(AltprojCmd),
    /// Run every scenario in a battery directory and write the aggregate report.
    Suite(SuiteCmd),
    /// Write the built-in scenario battery as JSON files.
    WriteBattery(WriteBatteryCmd),
}

#[derive(Args)]
struct ScheduleArgs {
    /// Initial probe radius.
    #[arg(long, default_value_t = 0.1)]
    rho0: f64,
    /// Radius shrink factor per step.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Number of radii in the schedule.
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Candidate budget per radius.
    #[arg(long, default_value_t = 120)]
    samples: usize,
}

impl ScheduleArgs {
    fn params(&self) -> Result<EstimatorParams, String> {
        if !(self.rho0 > 0.0) || !self.rho0.is_finite() {
            return Err("rho0 must be a positive real".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err("gamma must lie strictly between 0 and 1".into());
        }
        if self.steps == 0 {
            return Err("steps must be at least 1".into());
        }
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        let mut params = EstimatorParams::default();
        params.schedule = RadiusSchedule {
            rho0: self.rho0,
            gamma: self.gamma,
            steps: self.steps,
        };
        params.triple_samples = self.samples;
        params.pair_samples = self.samples;
        params.point_samples = (self.samples / 2).max(16);
        Ok(params)
    }
}

#[derive(Args)]
struct ScenarioCmd {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for constants.csv, report.json, run_meta.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; every estimator derives a named substream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct AltprojCmd {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for trace.csv, termination.json, run_meta.json.
    #[arg(long)]
    out: PathBuf,
    /// Starting point, comma separated (e.g. "1.0,0.0").
    #[arg(long)]
    x0: String,
    /// Cycle budget.
    #[arg(long, default_value_t = 500)]
    max_cycles: usize,
    /// Convergence tolerance on the residual distances.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Fail (exit 3) when no linear rate can be fitted.
    #[arg(long, default_value_t = false)]
    require_rate: bool,
    /// Seed recorded in run_meta.json; the iteration itself draws nothing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SuiteCmd {
    /// Directory of scenario JSON files.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for suite_report.json and per-scenario CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; each scenario derives its own stream from its label.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct WriteBatteryCmd {
    /// Directory receiving one JSON file per battery scenario.
    #[arg(long)]
    out: PathBuf,
    /// Seed stored inside the scenario files.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads() {
        Ok(()) => {}
        Err(msg) => {
            eprintln!("input error: {msg}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let code = match cli.command {
        Command::Estimate(a) => cmd_scenario(&a, false),
        Command::Verify(a) => cmd_scenario(&a, true),
        Command::Altproj(a) => cmd_altproj(&a),
        Command::Suite(a) => cmd_suite(&a),
        Command::WriteBattery(a) => cmd_write_battery(&a),
    };
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("TLAB_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("TLAB_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("could not size the worker pool: {e}"))
}

fn input_error(context: &str, err: impl std::fmt::Display) -> u8 {
    eprintln!("input error: {context}: {err}");
    EXIT_INPUT
}

fn runtime_error(context: &str, err: impl std::fmt::Display) -> u8 {
    eprintln!("runtime error: {context}: {err}");
    EXIT_RUNTIME
}

fn load(path: &Path) -> Result<PairScenario, u8> {
    load_scenario(path).map_err(|e| input_error(&path.display().to_string(), e))
}

fn ensure_out_dir(dir: &Path) -> Result<(), u8> {
    std::fs::create_dir_all(dir).map_err(|e| input_error(&dir.display().to_string(), e))
}

fn print_run_table(run: &ScenarioRun) {
    println!("scenario {}", run.estimates.label);
    println!("{:<16} {:>12} {}", "constant", "value", "flags");
    for est in run.estimates.all() {
        let mut flags = Vec::new();
        if est.flags.no_witness {
            flags.push("no_witness".to_string());
        }
        if est.flags.degenerate {
            flags.push("degenerate".to_string());
        }
        if est.flags.skipped_samples > 0 {
            flags.push(format!("skipped={}", est.flags.skipped_samples));
        }
        println!(
            "{:<16} {:>12.6} {}",
            est.name.as_str(),
            est.value,
            flags.join(";")
        );
    }
    let failed: Vec<&str> = run
        .report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.id.as_str())
        .collect();
    if failed.is_empty() {
        println!("checks: all {} passed", run.report.checks.len());
    } else {
        println!("checks: FAILED {}", failed.join(", "));
    }
}

fn cmd_scenario(args: &ScenarioCmd, gate_on_checks: bool) -> u8 {
    let params = match args.schedule.params() {
        Ok(p) => p,
        Err(msg) => return input_error("schedule", msg),
    };
    let sc = match load(&args.scenario) {
        Ok(sc) => sc,
        Err(code) => return code,
    };
    if let Err(code) = ensure_out_dir(&args.out) {
        return code;
    }
    let run = match run_scenario(&sc, &params, args.seed) {
        Ok(run) => run,
        Err(e) => return runtime_error(&sc.label, e),
    };
    if let Err(e) = write_scenario_outputs(&args.out, &run) {
        return runtime_error("writing outputs", e);
    }
    if let Err(e) = write_run_meta(&args.out, "tlab", args.seed) {
        return runtime_error("writing run metadata", e);
    }
    print_run_table(&run);
    if gate_on_checks && !run.report.overall {
        return EXIT_CHECK_FAILED;
    }
    EXIT_OK
}

fn parse_x0(raw: &str) -> Result<RealVector, String> {
    let parts: Result<Vec<f64>, _> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect();
    match parts {
        Ok(v) if !v.is_empty() => Ok(RealVector::from_slice(&v)),
        Ok(_) => Err("x0 must contain at least one coordinate".into()),
        Err(e) => Err(format!("x0 must be comma-separated reals: {e}")),
    }
}

fn cmd_altproj(args: &AltprojCmd) -> u8 {
    let sc = match load(&args.scenario) {
        Ok(sc) => sc,
        Err(code) => return code,
    };
    let x0 = match parse_x0(&args.x0) {
        Ok(v) => v,
        Err(msg) => return input_error("x0", msg),
    };
    if let Err(code) = ensure_out_dir(&args.out) {
        return code;
    }
    let trace = match run_alternating_projections(&sc, &x0, args.max_cycles, args.tol) {
        Ok(t) => t,
        Err(e @ (Error::DimensionMismatch { .. } | Error::Parse(_))) => {
            return input_error(&sc.label, e)
        }
        Err(e) => return runtime_error(&sc.label, e),
    };
    if let Err(e) = write_trace_outputs(&args.out, &trace) {
        return runtime_error("writing outputs", e);
    }
    if let Err(e) = write_run_meta(&args.out, "tlab", args.seed) {
        return runtime_error("writing run metadata", e);
    }
    println!(
        "terminated {:?} after {} cycles",
        trace.termination, trace.cycles
    );
    if let Some(stall) = detect_stall(&trace, args.tol.max(1e-12) * 100.0) {
        println!(
            "stationary pair a={:?} b={:?} gap={}",
            stall.point_a.as_slice(),
            stall.point_b.as_slice(),
            stall.gap
        );
    }
    match fit_linear_rate(&trace, 10) {
        Ok(fit) => {
            println!(
                "rate per cycle {:.6} (per half-step {:.6}, fit quality {:.4})",
                fit.rate_per_cycle, fit.rate_per_half_step, fit.quality
            );
            EXIT_OK
        }
        Err(e) => {
            if args.require_rate {
                runtime_error("rate fit", e)
            } else {
                println!("no linear rate available: {e}");
                EXIT_OK
            }
        }
    }
}

fn cmd_suite(args: &SuiteCmd) -> u8 {
    let params = match args.schedule.params() {
        Ok(p) => p,
        Err(msg) => return input_error("schedule", msg),
    };
    let entries = match std::fs::read_dir(&args.scenario) {
        Ok(it) => it,
        Err(e) => return input_error(&args.scenario.display().to_string(), e),
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return input_error(
            &args.scenario.display().to_string(),
            "battery directory holds no scenario JSON files",
        );
    }
    let mut scenarios = Vec::new();
    for p in &paths {
        match load(p) {
            Ok(sc) => scenarios.push(sc),
            Err(code) => return code,
        }
    }
    if let Err(code) = ensure_out_dir(&args.out) {
        return code;
    }
    let suite = match run_suite(&scenarios, &params, args.seed) {
        Ok(s) => s,
        Err(e) => return runtime_error("suite", e),
    };
    if let Err(e) = write_suite_outputs(&args.out, &suite) {
        return runtime_error("writing outputs", e);
    }
    if let Err(e) = write_run_meta(&args.out, "tlab", args.seed) {
        return runtime_error("writing run metadata", e);
    }
    for run in &suite.scenarios {
        let failed: Vec<&str> = run
            .report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect();
        if failed.is_empty() {
            println!("{:<24} pass", run.estimates.label);
        } else {
            println!("{:<24} FAIL {}", run.estimates.label, failed.join(", "));
        }
    }
    let facts_failed = suite.vector_facts.iter().filter(|c| !c.pass).count();
    println!(
        "vector facts: {}/{} passed",
        suite.vector_facts.len() - facts_failed,
        suite.vector_facts.len()
    );
    println!(
        "aggregate: {}",
        if suite.overall { "pass" } else { "FAIL" }
    );
    if suite.overall {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn cmd_write_battery(args: &WriteBatteryCmd) -> u8 {
    if let Err(code) = ensure_out_dir(&args.out) {
        return code;
    }
    for sc in battery(args.seed) {
        let path = args.out.join(format!("{}.json", sc.label));
        if let Err(e) = save_scenario(&path, &sc) {
            return runtime_error(&path.display().to_string(), e);
        }
        println!("wrote {}", path.display());
    }
    EXIT_OK
}
