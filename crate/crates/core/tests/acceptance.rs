//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use freefront::io::{cmd_run, config_text, parse_config, Exit, FRONTS_FILE, HEADER_FILE};
use freefront::model::{
    validate_kernel, validate_reaction, InitialProfile, KernelSpec, ProblemConfig, ReactionModel,
    TimeStep,
};
use freefront::validation::{
    comparison_test, convergence_study, oracle_run, snapshot_difference, ComparisonCase,
    OracleConfig, Refinement,
};
use freefront::{Simulation, Trajectory};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn kernels() -> Vec<KernelSpec> {
    vec![
        KernelSpec::uniform(1.0).unwrap(),
        KernelSpec::tent(1.0).unwrap(),
        KernelSpec::truncated_gaussian(1.0, 0.5).unwrap(),
    ]
}

fn reactions() -> Vec<ReactionModel> {
    vec![
        ReactionModel::competition(1.0, 1.0, 1.0),
        ReactionModel::prey_predator(1.0, 1.0, 1.0),
    ]
}

fn standard(kernel: KernelSpec, reaction: ReactionModel) -> ProblemConfig {
    ProblemConfig::new(
        kernel,
        reaction,
        InitialProfile::Bump { amp: 0.5 },
        InitialProfile::Bump { amp: 0.5 },
    )
}

fn suite() -> Vec<ProblemConfig> {
    reactions()
        .into_iter()
        .flat_map(|r| kernels().into_iter().map(move |k| standard(k, r.clone())))
        .collect()
}

fn label(cfg: &ProblemConfig) -> String {
    format!("{}/{}", cfg.reaction.kind(), cfg.kernel.family().name())
}

struct SuiteRun {
    label: String,
    cfg: ProblemConfig,
    traj: Result<Trajectory, String>,
    elapsed: Duration,
}

fn run_suite(picard_max: usize) -> Vec<SuiteRun> {
    suite()
        .into_par_iter()
        .map(|mut cfg| {
            cfg.picard_max = picard_max;
            let start = Instant::now();
            let traj = Simulation::new(cfg.clone())
                .map_err(|e| e.to_string())
                .and_then(|s| s.run().map_err(|e| e.to_string()));
            SuiteRun {
                label: label(&cfg),
                cfg,
                traj,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

/// Runs `check` on every suite member and joins the failures.
fn over_suite(
    runs: &[SuiteRun],
    check: impl Fn(&SuiteRun, &Trajectory) -> Result<String, String>,
) -> Verdict {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for run in runs {
        match &run.traj {
            Err(e) => failures.push(format!("{}: {e}", run.label)),
            Ok(traj) => match check(run, traj) {
                Ok(note) => notes.push(note),
                Err(why) => failures.push(format!("{}: {why}", run.label)),
            },
        }
    }
    if failures.is_empty() {
        verdict(true, notes.join("; "))
    } else {
        verdict(false, failures.join("; "))
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in kernels() {
        let allow = !k.is_lipschitz();
        if let Err(e) = validate_kernel(&k, 1.0, allow) {
            failures.push(format!("{}: {e}", k.family().name()));
        }
    }
    for r in reactions() {
        if let Err(e) = validate_reaction(&r, 1.0) {
            failures.push(format!("{}: {e}", r.kind()));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        failures.push(format!("runtime {elapsed:?} > 5 s"));
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("3 kernels, 2 reactions in {elapsed:.2?}")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_2(runs: &[SuiteRun]) -> Verdict {
    over_suite(runs, |run, traj| {
        let b = &traj.bounds;
        let o = &traj.monitor.observables;
        if run.elapsed > Duration::from_secs(120) {
            return Err(format!("runtime {:?} > 120 s", run.elapsed));
        }
        if o.min_w < -1e-10 || o.max_w > b.k1 * (1.0 + 1e-6) {
            return Err(format!("w range [{}, {}], k1 = {}", o.min_w, o.max_w, b.k1));
        }
        if o.min_z < -1e-10 || o.max_z > b.k2 * (1.0 + 1e-6) {
            return Err(format!("z range [{}, {}], k2 = {}", o.min_z, o.max_z, b.k2));
        }
        for p in traj.fronts.windows(2) {
            if !(p[1].h > p[0].h && p[1].g < p[0].g) {
                return Err(format!("fronts not strictly monotone at t = {}", p[1].t));
            }
        }
        let cap = b.k3 * 1.05;
        if !(o.min_flux_right > 0.0 && o.max_flux_right <= cap) {
            return Err(format!(
                "-v_x(h) in [{}, {}], cap {cap}",
                o.min_flux_right, o.max_flux_right
            ));
        }
        Ok(format!(
            "{} max w/k1 {:.3} -v_x(h)/k3 {:.3} in {:.1?}",
            run.label,
            o.max_w / b.k1,
            o.max_flux_right / b.k3,
            run.elapsed
        ))
    })
}

fn criterion_3(runs: &[SuiteRun]) -> Verdict {
    over_suite(runs, |run, traj| {
        let b = &traj.bounds;
        let cfg = &run.cfg;
        let (mu, rho, h0) = (cfg.mu, cfg.rho, cfg.h0);
        let mut worst_speed: f64 = 0.0;
        let mut worst_width: f64 = 0.0;
        for r in &traj.fronts {
            let envelope =
                mu * b.k3 + 2.0 * (h0 * rho * b.k1 + mu * b.k3) * (rho * b.k1 * r.t).exp();
            let growth = 2.0 * (h0 + mu * b.k3 / (rho * b.k1)) * (rho * b.k1 * r.t).exp();
            worst_speed = worst_speed.max(r.hdot.max(-r.gdot) / envelope);
            worst_width = worst_width.max((r.h - r.g) / growth);
        }
        if worst_speed > 1.05 || worst_width > 1.05 {
            return Err(format!(
                "speed/R {worst_speed:.3}, width/bound {worst_width:.3}"
            ));
        }
        Ok(format!(
            "{} speed/R {worst_speed:.3} width/bound {worst_width:.3}",
            run.label
        ))
    })
}

fn criterion_4(runs: &[SuiteRun]) -> Verdict {
    over_suite(runs, |run, traj| {
        let b = &traj.bounds;
        let h0 = run.cfg.h0;
        let fronts = traj
            .fronts
            .iter()
            .map(|r| (r.g + r.h).abs())
            .fold(0.0, f64::max);
        let mut field = traj.monitor.observables.max_w_asymmetry;
        for s in &traj.snapshots {
            let n = s.w.len();
            for j in 0..n {
                field = field.max((s.w[j] - s.w[n - 1 - j]).abs());
            }
        }
        if fronts > 1e-8 * h0 || field > 1e-8 * b.k1 {
            return Err(format!("|g+h| {fronts:e}, w asymmetry {field:e}"));
        }
        Ok(format!("{} |g+h| {fronts:.1e} w {field:.1e}", run.label))
    })
}

fn heat_config() -> ProblemConfig {
    let mut cfg = standard(KernelSpec::tent(1.0).unwrap(), ReactionModel::inert());
    cfg.mu = 0.0;
    cfg.rho = 0.0;
    cfg.u0 = InitialProfile::Bump { amp: 0.0 };
    // cos(πx/2) on [-1, 1]
    cfg.v0 = InitialProfile::Bump { amp: 1.0 };
    cfg
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut cfg = heat_config();
    cfg.horizon = 0.1;
    cfg.theta = 1.0;
    cfg.dt = TimeStep::Fixed(1e-5);
    let traj = match Simulation::new(cfg)
        .map_err(|e| e.to_string())
        .and_then(|s| s.run().map_err(|e| e.to_string()))
    {
        Ok(t) => t,
        Err(e) => return verdict(false, e),
    };
    let snap = traj.final_snapshot().expect("final snapshot");
    let decay = (-(PI / 2.0).powi(2) * 0.1).exp();
    let err = snap
        .x
        .iter()
        .zip(&snap.z)
        .map(|(&x, &z)| (z - decay * (PI * x / 2.0).cos()).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let front_drift = (snap.fronts.h - 1.0).abs() + (snap.fronts.g + 1.0).abs();
    verdict(
        err <= 1e-3 && elapsed < Duration::from_secs(30) && front_drift == 0.0 && snap.t == 0.1,
        format!("max error {err:.3e} at t = {} in {elapsed:.2?}", snap.t),
    )
}

/// `(|Δh| / h0, ‖Δu‖∞, ‖Δv‖∞, k1, k2)`
type OracleGap = (f64, f64, f64, f64, f64);

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let results: Vec<(String, Result<OracleGap, String>)> = kernels()
        .into_par_iter()
        .map(|k| {
            let mut cfg = standard(k, ReactionModel::competition(1.0, 1.0, 1.0));
            cfg.horizon = 0.5;
            let name = label(&cfg);
            let out = (|| {
                let main = Simulation::new(cfg.clone())
                    .map_err(|e| e.to_string())?
                    .run()
                    .map_err(|e| e.to_string())?;
                let ocfg = OracleConfig::for_problem(&cfg, &main.bounds, 2001);
                let oracle = oracle_run(&cfg, &ocfg).map_err(|e| e.to_string())?;
                let (a, b) = (
                    main.final_snapshot().unwrap(),
                    oracle.final_snapshot().unwrap(),
                );
                let (du, dv) = snapshot_difference(a, b);
                let dh = (a.fronts.h - b.fronts.h).abs() / cfg.h0;
                Ok((dh, du, dv, main.bounds.k1, main.bounds.k2))
            })();
            (name, out)
        })
        .collect();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(600);
    let mut parts = Vec::new();
    for (name, r) in results {
        match r {
            Ok((dh, du, dv, k1, k2)) => {
                pass &= dh <= 0.02 && du <= 0.05 * k1 && dv <= 0.05 * k2;
                parts.push(format!("{name} dh {dh:.1e} du {du:.1e} dv {dv:.1e}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    parts.push(format!("{elapsed:.1?}"));
    verdict(pass, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let outcomes: Vec<Result<f64, String>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let case = ComparisonCase::random(seed);
            comparison_test(&case, 60)
                .map(|r| r.min_lower.min(r.min_gap.unwrap_or(0.0)))
                .map_err(|e| format!("seed {seed}: {e}"))
        })
        .collect();
    let failures: Vec<&String> = outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    let worst = outcomes
        .iter()
        .filter_map(|o| o.as_ref().ok())
        .fold(f64::INFINITY, |m, &v| m.min(v));
    if failures.is_empty() {
        verdict(true, format!("100 cases, smallest raw value {worst:e}"))
    } else {
        verdict(
            false,
            format!("{} violations, first: {}", failures.len(), failures[0]),
        )
    }
}

fn criterion_8() -> Verdict {
    // a generous iteration cap so the iteration count is measured rather than imposed
    let runs = run_suite(50);
    over_suite(&runs, |run, traj| {
        let mut worst: f64 = 0.0;
        for (k, history) in traj.picard.iter().enumerate() {
            for p in history.windows(2) {
                let ratio = p[1] / p[0];
                if !(ratio <= 0.9) {
                    return Err(format!("step {k}: residuals {history:?}"));
                }
                worst = worst.max(ratio);
            }
        }
        let steps = traj.picard.len();
        let within = traj.picard.iter().filter(|h| h.len() <= 8).count();
        let share = within as f64 / steps as f64;
        if share < 0.99 {
            return Err(format!(
                "only {:.1}% of steps within 8 iterations",
                100.0 * share
            ));
        }
        Ok(format!(
            "{} ratio {worst:.3}, {:.1}% <= 8",
            run.label,
            100.0 * share
        ))
    })
}

fn criterion_9() -> Verdict {
    let coupled = standard(
        KernelSpec::tent(1.0).unwrap(),
        ReactionModel::competition(1.0, 1.0, 1.0),
    );
    let mut heat = heat_config();
    heat.theta = 0.5;
    heat.horizon = 0.5;
    let a = convergence_study(&coupled, &[0.004, 0.002, 0.001], Refinement::Time);
    let b = convergence_study(&heat, &[0.02, 0.01, 0.005], Refinement::Time);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let p_h = a.quantity("h(T)").and_then(|q| q.finest());
            let p_z = b.quantity("z(T)").and_then(|q| q.finest());
            let pass = p_h.is_some_and(|p| p >= 0.9) && p_z.is_some_and(|p| p >= 1.8);
            verdict(
                pass,
                format!("coupled h(T) order {p_h:?}, frozen-front z(T) order {p_z:?}"),
            )
        }
        (a, b) => verdict(false, format!("{:?} {:?}", a.err(), b.err())),
    }
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("temporary directory");
    let cfg_path = dir.path().join("standard.cfg");
    let cfg = standard(
        KernelSpec::tent(1.0).unwrap(),
        ReactionModel::competition(1.0, 1.0, 1.0),
    );
    let text = config_text(&cfg).expect("file representation");
    fs::write(&cfg_path, &text).expect("write config");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let exits = (cmd_run(&cfg_path, &a, false), cmd_run(&cfg_path, &b, false));
    if !matches!(exits, (Ok(Exit::Clean), Ok(Exit::Clean))) {
        return verdict(false, format!("runs did not finish cleanly: {exits:?}"));
    }
    let fa = fs::read(a.join(FRONTS_FILE)).expect("fronts a");
    let fb = fs::read(b.join(FRONTS_FILE)).expect("fronts b");
    let header: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join(HEADER_FILE)).expect("header")).expect("json");
    let echoed = header["config_text"].as_str().unwrap_or_default();
    let round_trip = parse_config(echoed)
        .ok()
        .and_then(|c| config_text(&c).ok())
        .is_some_and(|t| t == text);
    let ha = fs::read(a.join(HEADER_FILE)).expect("header a");
    let hb = fs::read(b.join(HEADER_FILE)).expect("header b");
    verdict(
        fa == fb && ha == hb && round_trip && !fa.is_empty(),
        format!(
            "fronts.csv {} bytes identical: {}, header identical: {}, config round trip: {round_trip}",
            fa.len(),
            fa == fb,
            ha == hb
        ),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Verdict + Sync + 'a>;

fn main() {
    let runs = run_suite(8);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("hypothesis validation", Box::new(criterion_1)),
        (
            "solution and flux invariants",
            Box::new(|| criterion_2(&runs)),
        ),
        ("speed and growth bounds", Box::new(|| criterion_3(&runs))),
        ("symmetry", Box::new(|| criterion_4(&runs))),
        ("closed-form heat decay", Box::new(criterion_5)),
        ("oracle equivalence", Box::new(criterion_6)),
        ("discrete comparison principle", Box::new(criterion_7)),
        ("Picard contraction", Box::new(criterion_8)),
        ("self-convergence", Box::new(criterion_9)),
        ("determinism and config round trip", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!(
            "[{tag}] #{:<2} {name} ({:.2?}): {}",
            k + 1,
            start.elapsed(),
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
