//! Closed-form optimal route counts and the nine tradeoff regimes.
//!
//! With homogeneous tasks only the number of tasks per route matters:
//! minimise `X2·B2 + X3·B3` subject to `I^S·X1 <= C`,
//! `k1(X1+X2) + k2·X3 <= P̄` and `X1+X2+X3 = F`.
//!
//! Writing `L = X1 + X2` for the number of locally computed tasks, the power
//! constraint becomes `(k1 − k2)·L <= P̄ − F·k2`: an upper bound on `L` when
//! local computing costs more power than uploading, a lower bound otherwise.
//! Route 1 is free, so `X1` is always pushed to its cache (or power) limit;
//! the remaining choice between routes 2 and 3 follows the cheaper one.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::bandwidth::{Route, RouteCosts};
use crate::error::{Constraint, Error, Result};
use crate::model::SystemConfig;

/// Relative slack for floors/ceilings of ratios that should be integers.
const ROUNDING_EPS: f64 = 1e-9;

/// Relative slack on the aggregate power budget.
pub const POWER_TOLERANCE: f64 = 1e-9;

pub(crate) fn floor_eps(x: f64) -> f64 {
    (x + ROUNDING_EPS * x.abs().max(1.0)).floor()
}

pub(crate) fn ceil_eps(x: f64) -> f64 {
    (x - ROUNDING_EPS * x.abs().max(1.0)).ceil()
}

/// Saturating conversion of a non-negative integral float into `[0, cap]`.
fn clamp_count(x: f64, cap: u64) -> u64 {
    if x <= 0.0 {
        0
    } else if x >= cap as f64 {
        cap
    } else {
        x as u64
    }
}

/// Count-level optimisation instance.
///
/// `b2`/`b3` are `None` when the route cannot meet the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountProblem {
    pub task_count: u64,
    pub remote_input_bits: f64,
    pub cache_bits: f64,
    pub k1: f64,
    pub k2: f64,
    pub power_budget: f64,
    pub route1_feasible: bool,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
}

/// Bound the power constraint places on the number of local tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalBound {
    /// `k1 > k2`: at most this many local tasks (clamped to `F`).
    AtMost(u64),
    /// `k1 < k2`: at least this many local tasks.
    AtLeast(u64),
    /// `k1 == k2`: the power constraint does not separate the routes.
    Free,
}

impl CountProblem {
    pub fn from_config(config: &SystemConfig, costs: &RouteCosts) -> Self {
        CountProblem {
            task_count: config.task_count,
            remote_input_bits: config.task.input_remote_bits,
            cache_bits: config.device.cache_bits,
            k1: costs.k1,
            k2: costs.k2,
            power_budget: config.device.avg_power_w,
            route1_feasible: costs.route1_feasible,
            b2: costs.cost(Route::FetchedLocal),
            b3: costs.cost(Route::Offloaded),
        }
    }

    /// `min{⌊C/I^S⌋, F}`, or 0 when route 1 misses the deadline.
    pub fn cache_slots(&self) -> u64 {
        if !self.route1_feasible {
            return 0;
        }
        if self.remote_input_bits == 0.0 {
            return self.task_count;
        }
        clamp_count(floor_eps(self.cache_bits / self.remote_input_bits), self.task_count)
    }

    pub fn cost(&self, route: Route) -> Option<f64> {
        match route {
            Route::CachedLocal => self.route1_feasible.then_some(0.0),
            Route::FetchedLocal => self.b2,
            Route::Offloaded => self.b3,
        }
    }

    /// Aggregate average device power of a count vector.
    pub fn power(&self, x1: u64, x2: u64, x3: u64) -> f64 {
        self.k1 * (x1 + x2) as f64 + self.k2 * x3 as f64
    }

    pub fn power_limit(&self) -> f64 {
        self.power_budget + POWER_TOLERANCE * self.power_budget.abs()
    }

    /// Route-2 is preferred over route-3 only when strictly cheaper.
    /// Latency-infeasible routes count as infinitely expensive.
    pub fn prefers_fetch(&self) -> bool {
        match (self.b2, self.b3) {
            (Some(b2), Some(b3)) => b3 > b2,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    pub fn local_bound(&self) -> Result<LocalBound> {
        let f = self.task_count as f64;
        let excess = self.power_budget - f * self.k2;
        if self.k1 > self.k2 {
            let x = excess / (self.k1 - self.k2);
            if floor_eps(x) < 0.0 {
                return Err(Error::Infeasible(Constraint::Power));
            }
            Ok(LocalBound::AtMost(clamp_count(floor_eps(x), self.task_count)))
        } else if self.k1 < self.k2 {
            let y = excess / (self.k1 - self.k2);
            let need = ceil_eps(y);
            if need > f {
                return Err(Error::Infeasible(Constraint::Power));
            }
            Ok(LocalBound::AtLeast(clamp_count(need, self.task_count)))
        } else if f * self.k2 <= self.power_limit() {
            Ok(LocalBound::Free)
        } else {
            Err(Error::Infeasible(Constraint::Power))
        }
    }

    /// Optimal `(X1, X2, X3)`.
    pub fn solve_counts(&self) -> Result<[u64; 3]> {
        let f = self.task_count;
        let slots = self.cache_slots();
        let (x1, x2) = match self.local_bound()? {
            LocalBound::AtMost(max_local) => {
                let x1 = slots.min(max_local);
                let x2 = if self.prefers_fetch() { max_local - x1 } else { 0 };
                (x1, x2)
            }
            LocalBound::AtLeast(min_local) => {
                let x2 = if self.prefers_fetch() { f - slots } else { min_local.saturating_sub(slots) };
                (slots, x2)
            }
            LocalBound::Free => {
                let x2 = if self.prefers_fetch() { f - slots } else { 0 };
                (slots, x2)
            }
        };
        let x3 = f - x1 - x2;
        if (x2 > 0 && self.b2.is_none()) || (x3 > 0 && self.b3.is_none()) {
            return Err(Error::Infeasible(Constraint::Latency));
        }
        Ok([x1, x2, x3])
    }

    /// `B2·X2 + B3·X3`; `None` if a used route is infeasible.
    pub fn bandwidth(&self, counts: [u64; 3]) -> Option<f64> {
        let mut total = 0.0;
        for (route, &n) in Route::ALL.iter().zip(&counts) {
            if n > 0 {
                total += self.cost(*route)? * n as f64;
            }
        }
        Some(total)
    }

    pub fn regime(&self) -> Result<Regime> {
        let slots = self.cache_slots();
        let f = self.task_count;
        let fetch = self.prefers_fetch();
        Ok(match self.local_bound()? {
            LocalBound::AtMost(max_local) => {
                let bound = if max_local >= f {
                    Bound::PowerAmple
                } else if max_local < slots {
                    Bound::PowerLimited
                } else {
                    Bound::CacheLimited
                };
                match (fetch, bound) {
                    (true, Bound::PowerLimited) => Regime::FetchPreferredPowerLimited,
                    (true, Bound::CacheLimited) => Regime::FetchPreferredCacheLimited,
                    (true, Bound::PowerAmple) => Regime::FetchPreferredPowerAmple,
                    (false, Bound::PowerLimited) => Regime::OffloadPreferredPowerLimited,
                    (false, Bound::CacheLimited) => Regime::OffloadPreferredCacheLimited,
                    (false, Bound::PowerAmple) => Regime::OffloadPreferredPowerAmple,
                }
            }
            LocalBound::AtLeast(_) | LocalBound::Free if fetch => Regime::UplinkCostlyLocalAlways,
            LocalBound::AtLeast(min_local) if min_local > slots => Regime::UplinkCostlyPowerFloor,
            LocalBound::AtLeast(_) | LocalBound::Free => Regime::UplinkCostlyCacheCovered,
        })
    }

    /// Labels of constraints that hold with equality at `counts`.
    pub fn binding(&self, counts: [u64; 3]) -> Vec<&'static str> {
        let [x1, x2, x3] = counts;
        let f = self.task_count;
        let mut out = Vec::new();
        if x1 < f && x1 == self.cache_slots() && self.route1_feasible {
            out.push("cache");
        }
        match self.local_bound() {
            Ok(LocalBound::AtMost(max_local)) if max_local < f && x1 + x2 == max_local => {
                out.push("power")
            }
            Ok(LocalBound::AtLeast(min_local)) if min_local > 0 && x1 + x2 == min_local => {
                out.push("power")
            }
            _ => {}
        }
        if (!self.route1_feasible && x3 > 0) || (self.b2.is_none() && x2 == 0 && x3 > 0) || (self.b3.is_none() && x3 == 0) {
            out.push("latency");
        }
        out
    }

    pub fn solve(&self) -> Result<PolicySolution> {
        let counts = self.solve_counts()?;
        self.solution(counts)
    }

    fn solution(&self, counts: [u64; 3]) -> Result<PolicySolution> {
        let b_total = self.bandwidth(counts).ok_or(Error::Infeasible(Constraint::Latency))?;
        Ok(PolicySolution {
            x1: counts[0],
            x2: counts[1],
            x3: counts[2],
            b_total,
            b_avg: b_total / self.task_count as f64,
            regime: self.regime()?,
            binding: self.binding(counts),
        })
    }

    /// Solution for a forced count vector, checked against every constraint.
    pub fn evaluate_counts(&self, counts: [u64; 3]) -> Result<PolicySolution> {
        let [x1, x2, x3] = counts;
        if x1 + x2 + x3 != self.task_count {
            return Err(Error::InvalidCounts(format!(
                "{x1} + {x2} + {x3} != {}",
                self.task_count
            )));
        }
        if x1 > self.cache_slots() {
            let constraint = if self.route1_feasible { Constraint::Cache } else { Constraint::Latency };
            return Err(Error::Infeasible(constraint));
        }
        if self.power(x1, x2, x3) > self.power_limit() {
            return Err(Error::Infeasible(Constraint::Power));
        }
        self.solution(counts)
    }

    pub fn baseline(&self, kind: Baseline) -> Result<PolicySolution> {
        let f = self.task_count;
        let counts = match kind {
            Baseline::MecOnly => [0, 0, f],
            Baseline::LocalOnly => {
                let x1 = self.cache_slots();
                [x1, f - x1, 0]
            }
            Baseline::LocalNoCache => [0, f, 0],
        };
        self.evaluate_counts(counts)
    }
}

enum Bound {
    PowerLimited,
    CacheLimited,
    PowerAmple,
}

/// One of the nine regions of the tradeoff.
///
/// The first six have `k1 > k2` (local computing draws more power than
/// uploading), split by whether route 2 beats route 3 and by how the power
/// bound on local tasks compares with the cache bound and `F`. The last three
/// have `k1 <= k2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// Power bound below the cache bound; `X1` set by power.
    FetchPreferredPowerLimited,
    /// Cache bound ≤ power bound < `F`; route 2 fills up to the power bound.
    FetchPreferredCacheLimited,
    /// Power bound ≥ `F`; everything local.
    FetchPreferredPowerAmple,
    OffloadPreferredPowerLimited,
    OffloadPreferredCacheLimited,
    OffloadPreferredPowerAmple,
    /// `k1 <= k2`, `B3 > B2`: offloading never helps.
    UplinkCostlyLocalAlways,
    /// `k1 < k2`, `B3 <= B2`: a power floor on local tasks forces `X2 > 0`.
    UplinkCostlyPowerFloor,
    /// `k1 <= k2`, `B3 <= B2`: cached tasks already cover the power floor.
    UplinkCostlyCacheCovered,
}

impl Regime {
    pub const ALL: [Regime; 9] = [
        Regime::FetchPreferredPowerLimited,
        Regime::FetchPreferredCacheLimited,
        Regime::FetchPreferredPowerAmple,
        Regime::OffloadPreferredPowerLimited,
        Regime::OffloadPreferredCacheLimited,
        Regime::OffloadPreferredPowerAmple,
        Regime::UplinkCostlyLocalAlways,
        Regime::UplinkCostlyPowerFloor,
        Regime::UplinkCostlyCacheCovered,
    ];

    /// Stable identifier used in JSON and CSV output.
    pub fn id(self) -> &'static str {
        match self {
            Regime::FetchPreferredPowerLimited => "local_preferred_power_limited",
            Regime::FetchPreferredCacheLimited => "local_preferred_cache_limited",
            Regime::FetchPreferredPowerAmple => "local_preferred_power_ample",
            Regime::OffloadPreferredPowerLimited => "mec_preferred_power_limited",
            Regime::OffloadPreferredCacheLimited => "mec_preferred_cache_limited",
            Regime::OffloadPreferredPowerAmple => "mec_preferred_power_ample",
            Regime::UplinkCostlyLocalAlways => "local_always_cache_limited",
            Regime::UplinkCostlyPowerFloor => "mec_preferred_power_floor",
            Regime::UplinkCostlyCacheCovered => "mec_preferred_cache_covered",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Regime::FetchPreferredPowerLimited => "power-limited, local preferred",
            Regime::FetchPreferredCacheLimited => "cache-limited, local preferred",
            Regime::FetchPreferredPowerAmple => "power-ample, local preferred",
            Regime::OffloadPreferredPowerLimited => "power-limited, MEC preferred",
            Regime::OffloadPreferredCacheLimited => "cache-limited, MEC preferred",
            Regime::OffloadPreferredPowerAmple => "power-ample, MEC preferred",
            Regime::UplinkCostlyLocalAlways => "local always, cache-limited",
            Regime::UplinkCostlyPowerFloor => "power floor forces downloads, MEC preferred",
            Regime::UplinkCostlyCacheCovered => "cache covers power floor, MEC preferred",
        }
    }

    pub fn from_id(id: &str) -> Option<Regime> {
        Regime::ALL.into_iter().find(|r| r.id() == id)
    }

    /// Whether local computing draws more power per task than uploading.
    pub fn local_costlier(self) -> bool {
        !matches!(
            self,
            Regime::UplinkCostlyLocalAlways | Regime::UplinkCostlyPowerFloor | Regime::UplinkCostlyCacheCovered
        )
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Regime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySolution {
    pub x1: u64,
    pub x2: u64,
    pub x3: u64,
    /// `B2·X2 + B3·X3` in Hz.
    #[serde(rename = "b_total_hz")]
    pub b_total: f64,
    /// `b_total / F`, the average per-task bandwidth.
    #[serde(rename = "b_avg_hz")]
    pub b_avg: f64,
    pub regime: Regime,
    pub binding: Vec<&'static str>,
}

impl PolicySolution {
    pub fn counts(&self) -> [u64; 3] {
        [self.x1, self.x2, self.x3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Every task computed at the server.
    MecOnly,
    /// Every task computed on the device, caching as many as fit.
    LocalOnly,
    /// Every task computed on the device after a download.
    LocalNoCache,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::MecOnly, Baseline::LocalOnly, Baseline::LocalNoCache];

    pub fn id(self) -> &'static str {
        match self {
            Baseline::MecOnly => "mec_only",
            Baseline::LocalOnly => "local_only",
            Baseline::LocalNoCache => "local_no_cache",
        }
    }

    pub fn from_id(id: &str) -> Option<Baseline> {
        Baseline::ALL.into_iter().find(|b| b.id() == id)
    }
}

/// Per-task caching flags `c_f`, local-computing flags `d_f` and routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub cache: Vec<bool>,
    pub local: Vec<bool>,
    pub route: Vec<Route>,
}

impl Assignment {
    pub fn counts(&self) -> [u64; 3] {
        let mut counts = [0u64; 3];
        for r in &self.route {
            counts[(r.index() - 1) as usize] += 1;
        }
        counts
    }
}

pub fn problem_for(config: &SystemConfig) -> Result<CountProblem> {
    let costs = RouteCosts::evaluate(config)?;
    Ok(CountProblem::from_config(config, &costs))
}

pub fn solve_optimal(config: &SystemConfig) -> Result<PolicySolution> {
    problem_for(config)?.solve()
}

pub fn classify_regime(config: &SystemConfig) -> Result<Regime> {
    let problem = problem_for(config)?;
    problem.solve_counts()?;
    problem.regime()
}

pub fn baseline_policy(kind: Baseline, config: &SystemConfig) -> Result<PolicySolution> {
    problem_for(config)?.baseline(kind)
}

/// Lays the counts out task by task: the first `x1` tasks are cached and
/// local, the next `x2` local with a download, the rest offloaded.
pub fn expand_assignment(x1: u64, x2: u64, x3: u64, config: &SystemConfig) -> Result<Assignment> {
    let f = config.task_count;
    if x1.checked_add(x2).and_then(|s| s.checked_add(x3)) != Some(f) {
        return Err(Error::InvalidCounts(format!("{x1} + {x2} + {x3} != {f}")));
    }
    if config.task.input_remote_bits * x1 as f64 > config.device.cache_bits {
        return Err(Error::InvalidCounts(format!(
            "{x1} cached inputs of {} bits exceed the {} bit cache",
            config.task.input_remote_bits, config.device.cache_bits
        )));
    }
    let route: Vec<Route> = std::iter::repeat_n(Route::CachedLocal, x1 as usize)
        .chain(std::iter::repeat_n(Route::FetchedLocal, x2 as usize))
        .chain(std::iter::repeat_n(Route::Offloaded, x3 as usize))
        .collect();
    Ok(Assignment {
        cache: route.iter().map(|r| *r == Route::CachedLocal).collect(),
        local: route.iter().map(|r| r.is_local()).collect(),
        route,
    })
}
