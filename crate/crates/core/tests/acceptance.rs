//! Acceptance criteria, one PASS/FAIL line each. Runs with a plain `main` so
//! the report lines are always printed.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use edge3c::bandwidth::{offload_coefficients, route3_bandwidth, route_latency, DEFAULT_BANDWIDTH_CAP_HZ};
use edge3c::oracle::sampler::ConfigSampler;
use edge3c::oracle::verify::{relative_error, verify_closed_form};
use edge3c::oracle::{enumerate_optimal, enumerate_per_task, numeric_bandwidth_split};
use edge3c::policy::CountProblem;
use edge3c::tradeoff::write_csv;
use edge3c::{
    detect_breakpoints, solve_optimal, sweep, turning_points, Baseline, Constraint, Error, Regime, Route, SweepParam,
    SweepSpec, SystemConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_form_matches_oracle() -> Outcome {
    let start = Instant::now();
    let mut sampler = ConfigSampler::new(20_240_601, 200);
    let configs: Vec<(Regime, SystemConfig)> = (0..10_000).map(|i| sampler.sample_stratified(i)).collect();
    let results: Vec<Result<(Regime, f64), String>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, (target, config))| {
            let closed = solve_optimal(config).map_err(|e| format!("trial {i}: closed form failed: {e}"))?;
            let oracle = enumerate_optimal(config).map_err(|e| format!("trial {i}: oracle failed: {e}"))?;
            if closed.regime != *target {
                return Err(format!("trial {i}: regime {} but sampled for {}", closed.regime.id(), target.id()));
            }
            let (x1, x2, x3) = (closed.x1, closed.x2, closed.x3);
            if x1 + x2 + x3 != config.task_count {
                return Err(format!("trial {i}: counts do not sum to F"));
            }
            Ok((closed.regime, relative_error(closed.b_total, oracle.b_total)))
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut seen = BTreeSet::new();
    for r in results {
        let (regime, err) = r?;
        seen.insert(regime.id());
        worst = worst.max(err);
    }
    ensure(worst <= 1e-9, || format!("max relative error {worst:e}"))?;
    ensure(seen.len() == 9, || format!("only {} regimes covered", seen.len()))?;
    ensure(elapsed <= 60.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!("10000 configs, 9 regimes, max rel err {worst:.1e}, {elapsed:.1} s"))
}

fn per_task_matches_counts() -> Outcome {
    let mut sampler = ConfigSampler::new(8, 8);
    let configs: Vec<SystemConfig> = (0..1000)
        .map(|i| if i % 2 == 0 { sampler.sample_stratified(i / 2).1 } else { sampler.sample_wild() })
        .collect();
    let mut worst: f64 = 0.0;
    let mut infeasible = 0;
    for (i, config) in configs.iter().enumerate() {
        match (enumerate_per_task(config), enumerate_optimal(config)) {
            (Ok(a), Ok(b)) => worst = worst.max(relative_error(a.b_total, b.b_total)),
            (Err(_), Err(_)) => infeasible += 1,
            (a, b) => return Err(format!("trial {i}: feasibility differs ({:?} vs {:?})", a.is_ok(), b.is_ok())),
        }
    }
    ensure(worst <= 1e-9, || format!("max relative error {worst:e}"))?;
    Ok(format!("1000 configs (F <= 8, {infeasible} infeasible on both), max rel err {worst:.1e}"))
}

fn kkt_split_matches_numeric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_split: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for i in 0..1000 {
        let a1 = rng.gen_range(-2.0f64..2.0).exp2().powi(3);
        let a2 = rng.gen_range(-2.0f64..2.0).exp2().powi(3);
        let a3 = rng.gen_range(0.01..10.0);
        let config = common::config_for_triple(a1, a2, a3);
        let c = offload_coefficients(&config).map_err(|e| e.to_string())?;
        let split = route3_bandwidth(&config, DEFAULT_BANDWIDTH_CAP_HZ).map_err(|e| format!("trial {i}: {e}"))?;
        let (bu, bd) = numeric_bandwidth_split(c.a1, c.a2, c.a3).map_err(|e| e.to_string())?;
        worst_split = worst_split
            .max(relative_error(split.uplink, bu))
            .max(relative_error(split.downlink, bd))
            .max(relative_error(split.total, bu + bd));
        let latency = route_latency(Route::Offloaded, &config, split.uplink, split.downlink).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(relative_error(latency, config.task.deadline_s));
    }
    ensure(worst_split <= 1e-6, || format!("split differs by {worst_split:e}"))?;
    ensure(worst_residual <= 1e-9, || format!("latency residual {worst_residual:e}"))?;
    Ok(format!("1000 triples, split err {worst_split:.1e}, latency residual {worst_residual:.1e}"))
}

fn counterexample_instance() -> CountProblem {
    CountProblem {
        task_count: 10,
        remote_input_bits: 1.0,
        cache_bits: 2.0,
        k1: 1.0,
        k2: 2.0,
        power_budget: 15.0,
        route1_feasible: true,
        b2: Some(3.0),
        b3: Some(1.0),
    }
}

fn counterexample() -> Outcome {
    let problem = counterexample_instance();
    let solution = problem.solve().map_err(|e| e.to_string())?;
    ensure(solution.b_total == 14.0, || format!("b_total {} instead of 14", solution.b_total))?;
    let oracle = edge3c::oracle::enumerate_counts(&problem, 1000).map_err(|e| e.to_string())?;
    ensure(oracle.b_total == 14.0, || format!("oracle b_total {}", oracle.b_total))?;
    // Flooring the lower bound gives X2 = max(0, 5 - 2) - 1 = 0 with
    // X1 = 2, so eight tasks offload.
    let literal = [2, 0, 8];
    let power = problem.power(literal[0], literal[1], literal[2]);
    ensure(power > problem.power_budget, || format!("literal variant uses {power} W"))?;
    match problem.evaluate_counts(literal) {
        Err(Error::Infeasible(Constraint::Power)) => {}
        other => return Err(format!("literal variant not rejected for power: {other:?}")),
    }
    Ok(format!("b_total 14 ({:?}); literal variant draws {power} W > 15 W", solution.counts()))
}

fn turning_point_shape() -> Outcome {
    let config = common::reference_config();
    let points = turning_points(&config).map_err(|e| e.to_string())?;
    let need = |p: edge3c::tradeoff::TurningPoint, name: &str| p.hz.ok_or_else(|| format!("{name} absent"));
    let (f1, f2, f3) = (need(points.f1, "f1")?, need(points.f2, "f2")?, need(points.f3, "f3")?);
    let spec = SweepSpec {
        parameter: SweepParam::DeviceCpuHz,
        start: 1.5e9,
        stop: 60e9,
        steps: 1000,
        baselines: vec![],
        log_scale: false,
    };
    let step = (spec.stop - spec.start) / (spec.steps - 1) as f64;
    ensure(spec.start < f1 && f1 < f2 && f2 < f3 && f3 < spec.stop, || {
        format!("turning points {f1:e}, {f2:e}, {f3:e} not ordered inside the range")
    })?;
    let rows = sweep(&config, &spec).map_err(|e| e.to_string())?;
    let mut b = Vec::with_capacity(rows.len());
    for row in &rows {
        b.push(row.b_total().ok_or_else(|| format!("infeasible at f_D = {:e}", row.value))?);
    }
    let breakpoints = detect_breakpoints(&rows).map_err(|e| e.to_string())?;
    ensure(breakpoints.len() == 3, || format!("breakpoints {breakpoints:?}"))?;
    for (bp, f) in breakpoints.iter().zip([f1, f2, f3]) {
        ensure((bp - f).abs() <= step, || format!("breakpoint {bp:e} vs analytic {f:e}"))?;
    }
    let tol = 1e-12;
    for i in 1..rows.len() {
        let (v, prev, cur) = (rows[i].value, b[i - 1], b[i]);
        if v < f1 {
            ensure((cur - prev).abs() <= tol * prev, || format!("not constant below f1 at {v:e}"))?;
        } else if rows[i - 1].value >= f1 && v <= f2 {
            ensure(cur <= prev * (1.0 + tol), || format!("increases on [f1,f2] at {v:e}"))?;
        } else if rows[i - 1].value >= f2 {
            ensure(cur >= prev * (1.0 - tol), || format!("decreases above f2 at {v:e}"))?;
        }
    }
    let top = rows.last().unwrap();
    let b3 = edge3c::RouteCosts::evaluate(&{
        let mut c = config.clone();
        SweepParam::DeviceCpuHz.apply(&mut c, top.value);
        c
    })
    .map_err(|e| e.to_string())?
    .b3;
    let target = config.task_count as f64 * b3;
    let gap = relative_error(*b.last().unwrap(), target);
    ensure(gap <= 0.01, || format!("top of range {gap:.3} away from F*B3"))?;

    let plateau = SweepSpec { start: 1.01 * f2, stop: 0.99 * f3, ..spec.clone() };
    let inner = detect_breakpoints(&sweep(&config, &plateau).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(inner.is_empty(), || format!("breakpoints inside (f2, f3): {inner:?}"))?;
    Ok(format!(
        "f1 {:.3} GHz, f2 {:.3} GHz, f3 {:.3} GHz, each within one step ({:.1} MHz); top {:.2}% from F*B3",
        f1 / 1e9,
        f2 / 1e9,
        f3 / 1e9,
        step / 1e6,
        gap * 100.0
    ))
}

fn scaled_range(param: SweepParam, config: &SystemConfig) -> (f64, f64) {
    match param {
        SweepParam::CacheBits => (0.0, 1.2 * config.task_count as f64 * config.task.input_remote_bits),
        SweepParam::AvgPowerW => (0.5 * config.device.avg_power_w, 3.0 * config.device.avg_power_w),
        SweepParam::ServerCpuHz => (0.8 * config.server.cpu_hz, 5.0 * config.server.cpu_hz),
        SweepParam::DeadlineS => (0.8 * config.task.deadline_s, 3.0 * config.task.deadline_s),
        SweepParam::DeviceCpuHz => unreachable!(),
    }
}

fn monotone_and_dominant() -> Outcome {
    let mut sampler = ConfigSampler::new(6, 200);
    let configs: Vec<SystemConfig> = (0..1000).map(|i| sampler.sample_stratified(i).1).collect();
    let params = [SweepParam::CacheBits, SweepParam::AvgPowerW, SweepParam::ServerCpuHz, SweepParam::DeadlineS];
    let checked: Result<Vec<usize>, String> = configs
        .par_iter()
        .enumerate()
        .map(|(i, config)| {
            let mut comparisons = 0;
            for param in params {
                let (start, stop) = scaled_range(param, config);
                let spec = SweepSpec {
                    parameter: param,
                    start,
                    stop,
                    steps: 10,
                    baselines: Baseline::ALL.to_vec(),
                    log_scale: false,
                };
                let rows = sweep(config, &spec).map_err(|e| e.to_string())?;
                let totals: Vec<f64> = rows.iter().map(|r| r.b_total().unwrap_or(f64::INFINITY)).collect();
                for w in totals.windows(2) {
                    ensure(w[1] <= w[0] * (1.0 + 1e-9), || {
                        format!("config {i}: b_total rises along {} ({} -> {})", param.id(), w[0], w[1])
                    })?;
                }
                for row in &rows {
                    for &(baseline, value) in &row.baselines {
                        let Some(value) = value else { continue };
                        let optimal = row.b_total().unwrap_or(f64::INFINITY);
                        ensure(optimal <= value * (1.0 + 1e-9), || {
                            format!("config {i}: {} beats optimum at {} = {}", baseline.id(), param.id(), row.value)
                        })?;
                        comparisons += 1;
                    }
                }
            }
            Ok(comparisons)
        })
        .collect();
    let comparisons: usize = checked?.into_iter().sum();
    Ok(format!("1000 configs x 4 parameters x 10 points, {comparisons} baseline comparisons"))
}

fn sweep_csv(threads: usize) -> Vec<u8> {
    let config = common::reference_config();
    let spec = SweepSpec {
        parameter: SweepParam::DeviceCpuHz,
        start: 1.5e9,
        stop: 60e9,
        steps: 1000,
        baselines: Baseline::ALL.to_vec(),
        log_scale: false,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let rows = sweep(&config, &spec).unwrap();
        let mut out = Vec::new();
        write_csv(&rows, &spec, &mut out).unwrap();
        out
    })
}

fn verify_json(threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| serde_json::to_vec(&verify_closed_form(1000, 7, 200)).unwrap())
}

fn run_binary(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_edge3c"))
        .args(args)
        .env("EDGE3C_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(output.status.success(), || format!("{args:?} exited with {}", output.status))?;
    Ok(output.stdout)
}

fn deterministic() -> Outcome {
    ensure(verify_json(1) == verify_json(1), || "verify report differs between runs".into())?;
    ensure(verify_json(1) == verify_json(4), || "verify report differs between 1 and 4 threads".into())?;
    ensure(sweep_csv(1) == sweep_csv(1), || "sweep CSV differs between runs".into())?;
    ensure(sweep_csv(1) == sweep_csv(4), || "sweep CSV differs between 1 and 4 threads".into())?;

    let reference = common::reference_path();
    let verify_args = ["verify", "--trials", "1000", "--seed", "7"];
    let sweep_args = [
        "sweep",
        "--config",
        reference.to_str().unwrap(),
        "--param",
        "device_cpu_hz",
        "--start",
        "1.5 GHz",
        "--stop",
        "60 GHz",
        "--steps",
        "1000",
        "--baselines",
        "mec_only,local_only,local_no_cache",
    ];
    for args in [&verify_args[..], &sweep_args[..]] {
        let first = run_binary(args, "1")?;
        ensure(first == run_binary(args, "1")?, || format!("{} output differs between runs", args[0]))?;
        ensure(first == run_binary(args, "4")?, || format!("{} output differs between 1 and 4 threads", args[0]))?;
    }
    Ok("verify --seed 7 and a 1000-step sweep are byte-identical across runs and 1/4 threads (library and binary)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("closed form matches count enumeration", closed_form_matches_oracle),
        ("per-task enumeration matches count enumeration", per_task_matches_counts),
        ("bandwidth split matches numeric optimum", kkt_split_matches_numeric),
        ("lower-bound counterexample", counterexample),
        ("device-frequency turning points", turning_point_shape),
        ("monotonicity and baseline dominance", monotone_and_dominant),
        ("determinism", deterministic),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
