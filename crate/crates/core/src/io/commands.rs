//! Batch commands behind the `freefront` binary. Each returns the process exit status:
//! 0 clean, 1 usage or configuration error, 2 solver or invariant failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{compute_bounds, AprioriBounds};
use crate::model::{
    kernel_floor, validate_kernel, validate_reaction, ConfigError, InitialProfile, KernelError,
    ProblemConfig, ReactionError, TimeStep,
};
use crate::solvers::SolverError;
use crate::stepper::{Simulation, Trajectory};
use crate::validation::{
    convergence_study, halving, oracle_run, ConvergenceReport, OracleConfig, Refinement,
    ValidationError,
};

use super::config_file::parse_config;
use super::output::{write_json, write_run_output, Header, RunReport};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "FREEFRONT_THREADS";
/// Parameters a sweep may vary.
pub const SWEEP_PARAMS: [&str; 5] = ["mu", "rho", "h0", "init.u0_amp", "init.v0_amp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Clean = 0,
    Usage = 1,
    Failure = 2,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("reaction: {0}")]
    Reaction(#[from] ReactionError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("validation: {0}")]
    Validation(#[from] ValidationError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Solver(_) | CliError::Validation(_) => Exit::Failure,
            _ => Exit::Usage,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ProblemConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

/// Hypothesis checks shared by `run` and `validate`; returns the bounds on success.
fn checked_bounds(
    cfg: &ProblemConfig,
    allow_nonlipschitz: bool,
) -> Result<AprioriBounds, CliError> {
    let floor = validate_kernel(&cfg.kernel, cfg.h0, allow_nonlipschitz)?;
    let bounds = compute_bounds(cfg, floor);
    validate_reaction(&cfg.reaction, bounds.k1)?;
    Ok(bounds)
}

fn write_err(dir: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    }
}

/// Result of one simulation written to a directory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: RunReport,
    pub error: Option<SolverError>,
}

impl RunOutcome {
    pub fn exit(&self) -> Exit {
        if self.report.is_clean() {
            Exit::Clean
        } else {
            Exit::Failure
        }
    }
}

/// Runs a validated configuration and writes its output; solver errors are recorded in
/// the report rather than returned.
pub fn run_to_dir(
    cfg: &ProblemConfig,
    out_dir: &Path,
    allow_nonlipschitz: bool,
) -> Result<RunOutcome, CliError> {
    let bounds = checked_bounds(cfg, allow_nonlipschitz)?;
    let header = Header::new(cfg, &bounds)?;
    let sim = Simulation::with_bounds(cfg.clone(), bounds);
    let (trajectory, error) = sim.run_partial();
    let report = RunReport::new(&trajectory, error.as_ref().map(|e| e as _));
    write_run_output(out_dir, &header, &trajectory, &report).map_err(write_err(out_dir))?;
    Ok(RunOutcome {
        trajectory,
        report,
        error,
    })
}

pub fn cmd_run(config: &Path, out_dir: &Path, allow_nonlipschitz: bool) -> Result<Exit, CliError> {
    let cfg = load_config(config)?;
    let outcome = run_to_dir(&cfg, out_dir, allow_nonlipschitz)?;
    let r = &outcome.report;
    match (&outcome.error, outcome.trajectory.final_fronts()) {
        (Some(e), _) => eprintln!("run failed: {e}"),
        (None, Some(last)) => println!(
            "t = {}: g = {:.6}, h = {:.6} after {} steps ({})",
            last.t, last.g, last.h, r.steps, r.status
        ),
        (None, None) => {}
    }
    for c in r.monitor.failures() {
        eprintln!(
            "invariant `{}` failed at t = {:?}: {}",
            c.name,
            c.first_violation,
            c.detail.as_deref().unwrap_or("")
        );
    }
    Ok(outcome.exit())
}

/// Formats the a-priori constants as an aligned table.
pub fn bounds_table(b: &AprioriBounds) -> String {
    let rows = [
        ("k1", b.k1),
        ("k2", b.k2),
        ("L", b.lipschitz),
        ("L*", b.lipschitz_x),
        ("k3", b.k3),
        ("eps0", b.eps0),
        ("M", b.width_cap),
        ("T0", b.t0),
        ("Rbar", b.rbar),
        ("rho*c0", b.rho_c0),
        ("rho*c0*", b.rho_c0_star),
        ("R(0)", b.speed_envelope(0.0)),
    ];
    let mut out = String::new();
    for (name, value) in rows {
        writeln!(out, "{name:>8}  {value:.10e}").expect("writing to a String");
    }
    for w in &b.warnings {
        writeln!(out, "warning: {w}").expect("writing to a String");
    }
    out
}

pub fn cmd_validate(config: &Path, allow_nonlipschitz: bool) -> Result<Exit, CliError> {
    let cfg = load_config(config)?;
    let floor = validate_kernel(&cfg.kernel, cfg.h0, allow_nonlipschitz)?;
    println!(
        "kernel {} (a = {}): ok, eps_bar = {}, delta0 = {}",
        cfg.kernel.family().name(),
        cfg.kernel.radius(),
        floor.eps_bar,
        floor.delta0
    );
    let bounds = compute_bounds(&cfg, floor);
    let report = validate_reaction(&cfg.reaction, bounds.k1)?;
    println!(
        "reaction {}: ok over {} samples, k0 = {}, r = {}",
        report.kind, report.samples, report.k0, report.r
    );
    if let Err(e) = cfg.check_initial_data() {
        println!("note: {e}");
    }
    print!("{}", bounds_table(&bounds));
    Ok(Exit::Clean)
}

/// Sets one sweepable parameter.
pub fn apply_param(cfg: &mut ProblemConfig, param: &str, value: f64) -> Result<(), ConfigError> {
    let bad = |message: &str| ConfigError::BadValue {
        key: param.into(),
        message: message.into(),
    };
    let scale = |p: &InitialProfile| match p {
        InitialProfile::Bump { .. } => Ok(InitialProfile::Bump { amp: value }),
        InitialProfile::Parabola { .. } => Ok(InitialProfile::Parabola { amp: value }),
        InitialProfile::Custom { .. } => Err(bad("custom profiles have no amplitude")),
    };
    match param {
        "mu" => cfg.mu = value,
        "rho" => cfg.rho = value,
        "h0" => cfg.h0 = value,
        "init.u0_amp" => cfg.u0 = scale(&cfg.u0)?,
        "init.v0_amp" => cfg.v0 = scale(&cfg.v0)?,
        _ => {
            return Err(bad(&format!(
                "not sweepable; expected one of {}",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    cfg.check_parameters()
}

/// Thread pool honouring [`THREADS_ENV`].
fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!("{THREADS_ENV} = `{raw}` is not a positive count"))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub h_final: Option<f64>,
    pub g_final: Option<f64>,
    pub max_u: Option<f64>,
    pub max_v: Option<f64>,
    pub status: String,
}

/// Runs one configuration per value in parallel, each into `out_dir/run_NNN`, and
/// writes `summary.csv`.
pub fn sweep(
    cfg: &ProblemConfig,
    param: &str,
    values: &[f64],
    out_dir: &Path,
    allow_nonlipschitz: bool,
) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(ConfigError::BadValue {
            key: param.into(),
            message: "empty value list".into(),
        }
        .into());
    }
    if !SWEEP_PARAMS.contains(&param) {
        return Err(ConfigError::BadValue {
            key: param.into(),
            message: format!("not sweepable; expected one of {}", SWEEP_PARAMS.join(", ")),
        }
        .into());
    }
    fs::create_dir_all(out_dir).map_err(write_err(out_dir))?;
    let rows: Vec<SweepRow> = pool()?.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(k, &value)| {
                let mut run_cfg = cfg.clone();
                let dir = out_dir.join(format!("run_{k:03}"));
                let result = apply_param(&mut run_cfg, param, value)
                    .map_err(CliError::from)
                    .and_then(|_| run_to_dir(&run_cfg, &dir, allow_nonlipschitz));
                match result {
                    Ok(outcome) => {
                        let snap = outcome.trajectory.final_snapshot();
                        let max = |f: &[f64]| f.iter().copied().fold(0.0, f64::max);
                        SweepRow {
                            value,
                            h_final: snap.map(|s| s.fronts.h),
                            g_final: snap.map(|s| s.fronts.g),
                            max_u: snap.map(|s| max(&s.w)),
                            max_v: snap.map(|s| max(&s.z)),
                            status: outcome.report.status.to_string(),
                        }
                    }
                    Err(e) => SweepRow {
                        value,
                        h_final: None,
                        g_final: None,
                        max_u: None,
                        max_v: None,
                        status: format!("error: {e}"),
                    },
                }
            })
            .collect()
    });
    let mut csv = String::from("value,h_T,g_T,max_u_T,max_v_T,status\n");
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in &rows {
        writeln!(
            csv,
            "{:.16e},{},{},{},{},\"{}\"",
            r.value,
            cell(r.h_final),
            cell(r.g_final),
            cell(r.max_u),
            cell(r.max_v),
            r.status.replace('"', "'")
        )
        .expect("writing to a String");
    }
    let path = out_dir.join("summary.csv");
    fs::write(&path, csv).map_err(|source| CliError::Write { path, source })?;
    Ok(rows)
}

pub fn cmd_sweep(
    config: &Path,
    param: &str,
    values: &[f64],
    out_dir: &Path,
    allow_nonlipschitz: bool,
) -> Result<Exit, CliError> {
    let cfg = load_config(config)?;
    let rows = sweep(&cfg, param, values, out_dir, allow_nonlipschitz)?;
    println!("{param:>12}  {:>14}  {:>14}  status", "h(T)", "g(T)");
    for r in &rows {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.8}"));
        println!(
            "{:>12}  {:>14}  {:>14}  {}",
            r.value,
            f(r.h_final),
            f(r.g_final),
            r.status
        );
    }
    let all_clean = rows.iter().all(|r| r.status == "clean");
    Ok(if all_clean {
        Exit::Clean
    } else {
        Exit::Failure
    })
}

/// Coarsest step of a study: the configured fixed step, or the automatic step at `t = 0`.
pub fn base_step(cfg: &ProblemConfig) -> Result<f64, CliError> {
    match cfg.dt {
        TimeStep::Fixed(dt) => Ok(dt),
        TimeStep::Auto => {
            let sim = Simulation::new(cfg.clone())?;
            Ok(sim.auto_dt(&sim.initial_state()))
        }
    }
}

pub fn convergence_table(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    writeln!(out, "{:>12}  {:>7}  {:>22}", "dt", "N", "h(T)").expect("writing to a String");
    for l in &report.levels {
        writeln!(out, "{:>12.4e}  {:>7}  {:>22.16}", l.dt, l.nodes, l.h_final)
            .expect("writing to a String");
    }
    writeln!(
        out,
        "{:>8}  {:>12}  observed order",
        "quantity", "finest diff"
    )
    .expect("writing to a String");
    for q in &report.quantities {
        let order = q.finest().map_or("-".to_string(), |p| format!("{p:.3}"));
        let diff = q.differences.last().copied().unwrap_or(0.0);
        writeln!(out, "{:>8}  {:>12.4e}  {order}", q.quantity, diff).expect("writing to a String");
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}").expect("writing to a String");
    }
    out
}

pub fn cmd_convergence(
    config: &Path,
    levels: usize,
    refinement: Refinement,
    out_dir: Option<&Path>,
) -> Result<Exit, CliError> {
    if levels < 3 {
        return Err(CliError::Usage(format!(
            "--levels must be at least 3, got {levels}"
        )));
    }
    let cfg = load_config(config)?;
    let steps = halving(base_step(&cfg)?, levels);
    let report = convergence_study(&cfg, &steps, refinement)?;
    print!("{}", convergence_table(&report));
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(write_err(dir))?;
        write_json(&dir.join("convergence.json"), &report).map_err(write_err(dir))?;
    }
    Ok(Exit::Clean)
}

/// Runs the physical-coordinate reference solver and writes its output like `run`.
pub fn cmd_oracle(config: &Path, out_dir: &Path, nodes: usize) -> Result<Exit, CliError> {
    let cfg = load_config(config)?;
    let bounds = compute_bounds(&cfg, kernel_floor(&cfg.kernel, cfg.h0));
    if nodes < 5 {
        return Err(CliError::Usage(format!(
            "--nodes must be at least 5, got {nodes}"
        )));
    }
    let ocfg = OracleConfig::for_problem(&cfg, &bounds, nodes);
    let traj = oracle_run(&cfg, &ocfg)?;
    let header = Header::new(&cfg, &bounds)?;
    let report = RunReport::new(&traj, None);
    write_run_output(out_dir, &header, &traj, &report).map_err(write_err(out_dir))?;
    if let Some(last) = traj.final_fronts() {
        println!(
            "oracle t = {}: g = {:.6}, h = {:.6}",
            last.t, last.g, last.h
        );
    }
    Ok(Exit::Clean)
}
