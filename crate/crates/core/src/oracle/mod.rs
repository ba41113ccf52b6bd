//! Brute-force reference solvers.
//!
//! Nothing here reuses the closed forms in [`crate::policy`] or
//! [`crate::bandwidth::kkt_split`]; the enumerators read only the raw
//! constraint data of a [`CountProblem`] and check every candidate directly.

pub mod sampler;
pub mod verify;

use rayon::prelude::*;
use serde::Serialize;

use crate::bandwidth::Route;
use crate::error::{Constraint, Error, Result};
use crate::model::SystemConfig;
use crate::policy::{problem_for, CountProblem, POWER_TOLERANCE};

/// Default ceiling on `F` for the `O(F²)` count enumeration.
pub const DEFAULT_COUNT_LIMIT: u64 = 5000;

/// Ceiling on `F` for the `3^F` per-task enumeration.
pub const PER_TASK_LIMIT: u64 = 10;

/// Relative tolerance under which two objective values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub x1: u64,
    pub x2: u64,
    pub x3: u64,
    #[serde(rename = "b_total_hz")]
    pub b_total: f64,
    /// Number of candidates whose objective ties the minimum.
    pub num_optima: u64,
}

impl OracleSolution {
    pub fn counts(&self) -> [u64; 3] {
        [self.x1, self.x2, self.x3]
    }
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Objective of a count vector if it meets the cache, power and latency
/// constraints, checked from the raw problem data.
fn admissible(p: &CountProblem, x1: u64, x2: u64, x3: u64) -> Option<f64> {
    if x1 > 0 && (!p.route1_feasible || p.remote_input_bits * x1 as f64 > p.cache_bits) {
        return None;
    }
    let power = p.k1 * (x1 + x2) as f64 + p.k2 * x3 as f64;
    if power > p.power_budget + POWER_TOLERANCE * p.power_budget.abs() {
        return None;
    }
    let mut total = 0.0;
    if x2 > 0 {
        total += p.b2? * x2 as f64;
    }
    if x3 > 0 {
        total += p.b3? * x3 as f64;
    }
    Some(total)
}

/// Exhaustive search over every `(X1, X2, X3)` with `X1 + X2 + X3 = F`.
pub fn enumerate_counts(problem: &CountProblem, limit: u64) -> Result<OracleSolution> {
    let f = problem.task_count;
    if f > limit {
        return Err(Error::TooLarge(f));
    }
    let stratum_best = |x1: u64| -> Option<(f64, u64, u64)> {
        (0..=f - x1)
            .filter_map(|x2| admissible(problem, x1, x2, f - x1 - x2).map(|b| (b, x1, x2)))
            .fold(None, |best: Option<(f64, u64, u64)>, cand| match best {
                Some(b) if b.0 <= cand.0 => Some(b),
                _ => Some(cand),
            })
    };
    let strata: Vec<_> = if f >= 256 {
        (0..=f).into_par_iter().map(stratum_best).collect()
    } else {
        (0..=f).map(stratum_best).collect()
    };
    let (b_total, x1, x2) = strata
        .into_iter()
        .flatten()
        .fold(None, |best: Option<(f64, u64, u64)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::Infeasible(infeasible_reason(problem)))?;

    let stratum_ties = |x1: u64| -> u64 {
        (0..=f - x1)
            .filter(|&x2| admissible(problem, x1, x2, f - x1 - x2).is_some_and(|b| tied(b, b_total)))
            .count() as u64
    };
    let num_optima = if f >= 256 {
        (0..=f).into_par_iter().map(stratum_ties).sum()
    } else {
        (0..=f).map(stratum_ties).sum()
    };
    Ok(OracleSolution {
        x1,
        x2,
        x3: f - x1 - x2,
        b_total,
        num_optima,
    })
}

/// Which constraint family rules every candidate out.
fn infeasible_reason(p: &CountProblem) -> Constraint {
    let f = p.task_count as f64;
    let min_power = f * p.k1.min(p.k2);
    if min_power > p.power_budget + POWER_TOLERANCE * p.power_budget.abs() {
        Constraint::Power
    } else {
        Constraint::Latency
    }
}

/// Enumerates every per-task route vector (`3^F` of them) and sums per-task
/// bandwidth, cache use and power without aggregating into counts.
pub fn enumerate_routes(problem: &CountProblem) -> Result<OracleSolution> {
    let f = problem.task_count;
    if f > PER_TASK_LIMIT {
        return Err(Error::TooLarge(f));
    }
    let n = f as usize;
    let total = 3u64.pow(f as u32);
    let per_task_power = |r: Route| if r.is_local() { problem.k1 } else { problem.k2 };
    let budget = problem.power_budget + POWER_TOLERANCE * problem.power_budget.abs();

    let mut best: Option<(f64, [u64; 3])> = None;
    let mut values = Vec::new();
    let mut routes = vec![Route::CachedLocal; n];
    'outer: for code in 0..total {
        let mut rest = code;
        for slot in routes.iter_mut() {
            *slot = Route::ALL[(rest % 3) as usize];
            rest /= 3;
        }
        let mut cache_used = 0.0;
        let mut power = 0.0;
        let mut bandwidth = 0.0;
        let mut counts = [0u64; 3];
        for &r in &routes {
            let Some(cost) = problem.cost(r) else {
                continue 'outer;
            };
            if r == Route::CachedLocal {
                cache_used += problem.remote_input_bits;
            }
            power += per_task_power(r);
            bandwidth += cost;
            counts[(r.index() - 1) as usize] += 1;
        }
        if cache_used > problem.cache_bits || power > budget {
            continue;
        }
        values.push(bandwidth);
        if best.is_none_or(|(b, _)| bandwidth < b) {
            best = Some((bandwidth, counts));
        }
    }
    let (b_total, counts) = best.ok_or_else(|| Error::Infeasible(infeasible_reason(problem)))?;
    Ok(OracleSolution {
        x1: counts[0],
        x2: counts[1],
        x3: counts[2],
        b_total,
        num_optima: values.iter().filter(|&&v| tied(v, b_total)).count() as u64,
    })
}

pub fn enumerate_optimal(config: &SystemConfig) -> Result<OracleSolution> {
    enumerate_counts(&problem_for(config)?, DEFAULT_COUNT_LIMIT)
}

pub fn enumerate_per_task(config: &SystemConfig) -> Result<OracleSolution> {
    enumerate_routes(&problem_for(config)?)
}

/// Numeric minimiser of `bu + bd` subject to `a1/bu + a2/bd <= a3`.
///
/// The constraint is tight at the optimum, so `bd` is solved from it and a
/// golden-section search runs over `ln bu` on `(a1/a3, 2(a1+a2)/a3]`: the
/// upper end is the cost of the feasible point `(2a1/a3, 2a2/a3)`, which
/// bounds the optimal `bu` from above.
pub fn numeric_bandwidth_split(a1: f64, a2: f64, a3: f64) -> Result<(f64, f64)> {
    if !(a1.is_finite() && a1 >= 0.0) {
        return Err(Error::invalid("a1", "must be finite and >= 0"));
    }
    if !(a2.is_finite() && a2 >= 0.0) {
        return Err(Error::invalid("a2", "must be finite and >= 0"));
    }
    if !(a3.is_finite() && a3 > 0.0) {
        return Err(Error::invalid("a3", "must be finite and > 0"));
    }
    if a1 + a2 <= 0.0 {
        return Err(Error::invalid("a1+a2", "must be > 0"));
    }
    if a1 == 0.0 {
        return Ok((0.0, a2 / a3));
    }
    if a2 == 0.0 {
        return Ok((a1 / a3, 0.0));
    }
    let downlink = |bu: f64| a2 / (a3 - a1 / bu);
    let cost = |s: f64| {
        let bu = s.exp();
        bu + downlink(bu)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (a1 / a3).ln();
    let mut hi = (2.0 * (a1 + a2) / a3).ln();
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = cost(x1);
    let mut f2 = cost(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    let bu = ((lo + hi) / 2.0).exp();
    Ok((bu, downlink(bu)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(f: u64, k1: f64, k2: f64, budget: f64, slots: u64, b2: f64, b3: f64) -> CountProblem {
        CountProblem {
            task_count: f,
            remote_input_bits: 1.0,
            cache_bits: slots as f64,
            k1,
            k2,
            power_budget: budget,
            route1_feasible: true,
            b2: Some(b2),
            b3: Some(b3),
        }
    }

    #[test]
    fn count_enumeration_examples() {
        let s = enumerate_counts(&instance(10, 2.0, 1.0, 15.0, 3, 1.0, 2.0), 5000).unwrap();
        assert_eq!((s.counts(), s.b_total, s.num_optima), ([3, 2, 5], 12.0, 1));

        let s = enumerate_counts(&instance(10, 1.0, 2.0, 15.0, 2, 3.0, 1.0), 5000).unwrap();
        assert_eq!((s.counts(), s.b_total), ([2, 3, 5], 14.0));
    }

    #[test]
    fn flat_objective_counts_every_feasible_vector() {
        let p = instance(4, 1.0, 1.0, 100.0, 10, 0.0, 0.0);
        let s = enumerate_counts(&p, 5000).unwrap();
        assert_eq!(s.b_total, 0.0);
        assert_eq!(s.num_optima, 15); // C(6, 2) compositions of 4 into 3 parts
    }

    #[test]
    fn power_starved_instance_is_infeasible() {
        let p = instance(10, 2.0, 1.5, 14.0, 3, 1.0, 2.0);
        assert_eq!(enumerate_counts(&p, 5000), Err(Error::Infeasible(Constraint::Power)));
        assert_eq!(enumerate_routes(&instance(5, 2.0, 1.5, 7.0, 3, 1.0, 2.0)), Err(Error::Infeasible(Constraint::Power)));
    }

    #[test]
    fn enumeration_limits() {
        let p = instance(11, 2.0, 1.0, 100.0, 3, 1.0, 2.0);
        assert_eq!(enumerate_routes(&p), Err(Error::TooLarge(11)));
        assert_eq!(enumerate_counts(&p, 10), Err(Error::TooLarge(11)));
    }

    #[test]
    fn per_task_single_and_pair() {
        let s = enumerate_routes(&instance(1, 2.0, 1.0, 100.0, 0, 5.0, 1.0)).unwrap();
        assert_eq!(s.counts(), [0, 0, 1]);

        // Nine route pairs; one cached slot, plenty of power, route 2 cheaper.
        let s = enumerate_routes(&instance(2, 2.0, 1.0, 1e6, 1, 1.0, 3.0)).unwrap();
        assert_eq!(s.counts(), [1, 1, 0]);
        assert_eq!(s.b_total, 1.0);
        assert_eq!(s.num_optima, 2); // (1,2) and (2,1)
    }

    #[test]
    fn per_task_matches_counts_on_examples() {
        for p in [
            instance(8, 2.0, 1.0, 12.0, 3, 1.0, 2.0),
            instance(8, 1.0, 2.0, 13.0, 2, 3.0, 1.0),
            instance(7, 1.0, 1.0, 7.0, 1, 3.0, 1.0),
        ] {
            let a = enumerate_routes(&p).unwrap();
            let b = enumerate_counts(&p, 5000).unwrap();
            assert!((a.b_total - b.b_total).abs() <= 1e-9 * b.b_total.max(1.0));
        }
    }

    #[test]
    fn split_examples() {
        let (bu, bd) = numeric_bandwidth_split(4.0, 9.0, 1.0).unwrap();
        assert!((bu - 10.0).abs() < 1e-6 && (bd - 15.0).abs() < 1e-6);
        let (bu, bd) = numeric_bandwidth_split(1.0, 1.0, 2.0).unwrap();
        assert!((bu - 1.0).abs() < 1e-7 && (bd - 1.0).abs() < 1e-7);
        assert_eq!(numeric_bandwidth_split(0.0, 5.0, 1.0).unwrap(), (0.0, 5.0));
        assert!(numeric_bandwidth_split(0.0, 0.0, 1.0).is_err());
        assert!(numeric_bandwidth_split(1.0, 1.0, -1.0).is_err());
    }
}
