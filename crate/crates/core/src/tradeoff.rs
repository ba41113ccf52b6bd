//! Turning points of the optimal policy in the device CPU frequency, and a
//! one-parameter sweep engine with CSV output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::policy::{problem_for, Baseline, PolicySolution, Regime};

/// A turning-point frequency, or the reason it does not exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurningPoint {
    pub hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absent: Option<&'static str>,
}

impl TurningPoint {
    fn at(hz: f64) -> Self {
        Self { hz: Some(hz), absent: None }
    }

    fn absent(reason: &'static str) -> Self {
        Self { hz: None, absent: Some(reason) }
    }

    fn from_radicand(value: f64, reason: &'static str) -> Self {
        if value.is_finite() && value >= 0.0 {
            Self::at(value.sqrt())
        } else {
            Self::absent(reason)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurningPoints {
    /// Route 2 and route 3 bandwidths cross.
    pub f1: TurningPoint,
    /// The power bound on local tasks reaches `F`.
    pub f2: TurningPoint,
    /// The power bound on local tasks reaches the cache bound.
    pub f3: TurningPoint,
}

/// Device frequency at which `B2 = B3`.
///
/// `total_cycles = (I^S + I^D)·w`; `se_down` is the downlink spectral
/// efficiency; `a1, a2, a3` are the offloading coefficients.
pub fn crossover_frequency(
    total_cycles: f64,
    deadline_s: f64,
    remote_bits: f64,
    se_down: f64,
    a1: f64,
    a2: f64,
    a3: f64,
) -> TurningPoint {
    if remote_bits <= 0.0 {
        return TurningPoint::absent("no remote input: route 2 needs no bandwidth");
    }
    if a3 <= 0.0 {
        return TurningPoint::absent("route 3 misses the deadline");
    }
    let offload_weight = (a1.sqrt() + a2.sqrt()).powi(2);
    if offload_weight <= 0.0 {
        return TurningPoint::absent("route 3 needs no bandwidth");
    }
    let denominator = deadline_s - a3 * remote_bits / (se_down * offload_weight);
    if denominator > 0.0 {
        TurningPoint::at(total_cycles / denominator)
    } else {
        TurningPoint::absent("route 2 never undercuts route 3")
    }
}

/// Device frequency at which `F·k1 = P̄` (floor dropped).
pub fn power_saturation_frequency(deadline_s: f64, avg_power_w: f64, capacitance: f64, total_cycles: f64) -> TurningPoint {
    TurningPoint::from_radicand(
        deadline_s * avg_power_w / (capacitance * total_cycles),
        "non-positive radicand",
    )
}

/// Device frequency at which the power bound on local tasks equals
/// `C/I^S` (floors dropped).
#[allow(clippy::too_many_arguments)]
pub fn cache_power_frequency(
    deadline_s: f64,
    task_count: f64,
    remote_bits: f64,
    cache_bits: f64,
    avg_power_w: f64,
    k2: f64,
    capacitance: f64,
    total_cycles: f64,
) -> TurningPoint {
    if cache_bits <= 0.0 {
        return TurningPoint::absent("no cache: the cache bound is zero");
    }
    if remote_bits <= 0.0 {
        return TurningPoint::absent("no remote input: the cache bound is unlimited");
    }
    let scale = deadline_s * task_count / (capacitance * total_cycles);
    let radicand = scale * (remote_bits * (avg_power_w - task_count * k2) / cache_bits + k2);
    if avg_power_w < task_count * k2 {
        return TurningPoint::absent("power budget below F·k2: no mix is power-feasible");
    }
    TurningPoint::from_radicand(radicand, "negative radicand")
}

pub fn turning_points(config: &SystemConfig) -> Result<TurningPoints> {
    let t = &config.task;
    let d = &config.device;
    let cycles = config.task_cycles();
    if d.switched_capacitance <= 0.0 {
        return Err(Error::invalid("switched_capacitance", "must be > 0 for turning points"));
    }
    if cycles <= 0.0 {
        return Err(Error::invalid("cycles_per_bit", "task needs cycles for turning points"));
    }
    let k = config.power_coefficients()?;
    let c = crate::bandwidth::offload_coefficients(config)?;
    Ok(TurningPoints {
        f1: crossover_frequency(
            cycles,
            t.deadline_s,
            t.input_remote_bits,
            config.downlink_efficiency(),
            c.a1,
            c.a2,
            c.a3,
        ),
        f2: power_saturation_frequency(t.deadline_s, d.avg_power_w, d.switched_capacitance, cycles),
        f3: cache_power_frequency(
            t.deadline_s,
            config.task_count as f64,
            t.input_remote_bits,
            d.cache_bits,
            d.avg_power_w,
            k.k2,
            d.switched_capacitance,
            cycles,
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    CacheBits,
    DeviceCpuHz,
    AvgPowerW,
    DeadlineS,
    ServerCpuHz,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::CacheBits,
        SweepParam::DeviceCpuHz,
        SweepParam::AvgPowerW,
        SweepParam::DeadlineS,
        SweepParam::ServerCpuHz,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SweepParam::CacheBits => "cache_bits",
            SweepParam::DeviceCpuHz => "device_cpu_hz",
            SweepParam::AvgPowerW => "avg_power_w",
            SweepParam::DeadlineS => "deadline_s",
            SweepParam::ServerCpuHz => "server_cpu_hz",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.id() == id)
    }

    pub fn apply(self, config: &mut SystemConfig, value: f64) {
        match self {
            SweepParam::CacheBits => config.device.cache_bits = value,
            SweepParam::DeviceCpuHz => config.device.cpu_hz = value,
            SweepParam::AvgPowerW => config.device.avg_power_w = value,
            SweepParam::DeadlineS => config.task.deadline_s = value,
            SweepParam::ServerCpuHz => config.server.cpu_hz = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub baselines: Vec<Baseline>,
    #[serde(default)]
    pub log_scale: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::invalid("start/stop", "must be finite"));
        }
        if self.start >= self.stop {
            return Err(Error::invalid("start", "must be < stop"));
        }
        if self.steps < 2 {
            return Err(Error::invalid("steps", "must be >= 2"));
        }
        if self.log_scale && self.start <= 0.0 {
            return Err(Error::invalid("start", "must be > 0 on a log scale"));
        }
        Ok(())
    }

    /// Grid values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    return self.stop;
                }
                let frac = i as f64 / last;
                if self.log_scale {
                    (self.start.ln() + frac * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + frac * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when no policy is feasible at this point.
    pub solution: Option<PolicySolution>,
    /// `b_total` per requested baseline, `None` when infeasible.
    pub baselines: Vec<(Baseline, Option<f64>)>,
}

impl SweepRow {
    pub fn regime(&self) -> Option<Regime> {
        self.solution.as_ref().map(|s| s.regime)
    }

    pub fn b_total(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.b_total)
    }
}

fn evaluate_row(config: &SystemConfig, spec: &SweepSpec, value: f64) -> SweepRow {
    let mut cfg = config.clone();
    spec.parameter.apply(&mut cfg, value);
    let problem = cfg.validate().ok().and_then(|c| problem_for(&c).ok());
    let solution = problem.as_ref().and_then(|p| p.solve().ok());
    let baselines = spec
        .baselines
        .iter()
        .map(|&b| (b, problem.as_ref().and_then(|p| p.baseline(b).ok()).map(|s| s.b_total)))
        .collect();
    SweepRow {
        value,
        solution,
        baselines,
    }
}

/// Evaluates the optimal policy and requested baselines at each grid value.
/// Rows come back in ascending parameter order; infeasible points are kept.
pub fn sweep(config: &SystemConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .values()
        .into_par_iter()
        .map(|v| evaluate_row(config, spec, v))
        .collect())
}

/// Parameter values at which the regime changes between consecutive rows.
/// The value reported is that of the first row in the new regime.
pub fn detect_breakpoints(rows: &[SweepRow]) -> Result<Vec<f64>> {
    if rows.len() < 3 {
        return Err(Error::invalid("rows", "need at least 3 rows"));
    }
    if rows.windows(2).any(|w| w[0].value.partial_cmp(&w[1].value) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("rows", "values must be strictly ascending"));
    }
    Ok(rows
        .windows(2)
        .filter(|w| w[0].regime() != w[1].regime())
        .map(|w| w[1].value)
        .collect())
}

const INF_TOKEN: &str = "INF";

fn cell(v: Option<impl ToString>) -> String {
    v.map_or_else(|| INF_TOKEN.to_string(), |v| v.to_string())
}

/// Writes rows as CSV with header
/// `param,value,x1,x2,x3,b_total_hz,b_avg_hz,regime,<baseline>_hz...`.
pub fn write_csv<W: Write>(rows: &[SweepRow], spec: &SweepSpec, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["param", "value", "x1", "x2", "x3", "b_total_hz", "b_avg_hz", "regime"]
        .map(String::from)
        .to_vec();
    header.extend(spec.baselines.iter().map(|b| format!("{}_hz", b.id())));
    w.write_record(&header)?;
    for row in rows {
        let s = row.solution.as_ref();
        let mut record = vec![
            spec.parameter.id().to_string(),
            row.value.to_string(),
            cell(s.map(|s| s.x1)),
            cell(s.map(|s| s.x2)),
            cell(s.map(|s| s.x3)),
            cell(s.map(|s| s.b_total)),
            cell(s.map(|s| s.b_avg)),
            cell(s.map(|s| s.regime.id())),
        ];
        record.extend(row.baselines.iter().map(|(_, b)| cell(*b)));
        w.write_record(&record)?;
    }
    w.flush()
}
