//! Per-route minimum bandwidth, latency and device power.
//!
//! Route 1 computes locally from a cache hit, route 2 downloads the remote
//! input and computes locally, route 3 uploads the local input and lets the
//! server compute and return the output. Each route's bandwidth is the least
//! `B^U + B^D` that meets the deadline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Default guard against near-singular latency slack.
pub const DEFAULT_BANDWIDTH_CAP_HZ: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Local computing with the remote input cached on the device.
    CachedLocal,
    /// Local computing after downloading the remote input.
    FetchedLocal,
    /// Computing at the edge server.
    Offloaded,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::CachedLocal, Route::FetchedLocal, Route::Offloaded];

    /// 1-based route number.
    pub fn index(self) -> u8 {
        match self {
            Route::CachedLocal => 1,
            Route::FetchedLocal => 2,
            Route::Offloaded => 3,
        }
    }

    pub fn from_index(index: u8) -> Option<Route> {
        match index {
            1 => Some(Route::CachedLocal),
            2 => Some(Route::FetchedLocal),
            3 => Some(Route::Offloaded),
            _ => None,
        }
    }

    pub fn is_local(self) -> bool {
        self != Route::Offloaded
    }
}

/// Optimal offloading bandwidth and its uplink/downlink split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffloadSplit {
    pub total: f64,
    pub uplink: f64,
    pub downlink: f64,
}

/// Minimises `bu + bd` subject to `a1/bu + a2/bd <= a3`.
///
/// At the optimum the constraint is tight and
/// `bu = (a1 + √(a1 a2))/a3`, `bd = (a2 + √(a1 a2))/a3`, and the total
/// `(√a1 + √a2)²/a3` is expanded so a zero side stays exact.
/// A zero coefficient gives that side zero bandwidth.
pub fn kkt_split(a1: f64, a2: f64, a3: f64) -> Result<OffloadSplit> {
    if !(a1.is_finite() && a1 >= 0.0) {
        return Err(Error::invalid("a1", "must be finite and >= 0"));
    }
    if !(a2.is_finite() && a2 >= 0.0) {
        return Err(Error::invalid("a2", "must be finite and >= 0"));
    }
    if !(a3.is_finite() && a3 > 0.0) {
        return Err(Error::invalid("a3", "must be finite and > 0"));
    }
    let cross = (a1 * a2).sqrt();
    let uplink = (a1 + cross) / a3;
    let downlink = (a2 + cross) / a3;
    let total = (a1 + a2 + 2.0 * cross) / a3;
    Ok(OffloadSplit {
        total,
        uplink,
        downlink,
    })
}

/// Coefficients of the offloading latency constraint `a1/B^U + a2/B^D <= a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffloadCoefficients {
    /// Uplink bits per unit spectral efficiency.
    pub a1: f64,
    /// Downlink bits per unit spectral efficiency.
    pub a2: f64,
    /// Deadline left after server computing, seconds.
    pub a3: f64,
}

pub fn offload_coefficients(config: &SystemConfig) -> Result<OffloadCoefficients> {
    let t = &config.task;
    let a1 = side_coefficient(t.input_local_bits, config.uplink_efficiency())?;
    let a2 = side_coefficient(t.output_bits, config.downlink_efficiency())?;
    let a3 = t.deadline_s - config.server_compute_latency();
    Ok(OffloadCoefficients { a1, a2, a3 })
}

fn side_coefficient(bits: f64, efficiency: f64) -> Result<f64> {
    if bits == 0.0 {
        Ok(0.0)
    } else if efficiency > 0.0 {
        Ok(bits / efficiency)
    } else {
        Err(Error::DegenerateChannel)
    }
}

pub fn route1_bandwidth(config: &SystemConfig) -> Result<f64> {
    if config.local_compute_latency() <= config.task.deadline_s {
        Ok(0.0)
    } else {
        Err(Error::RouteInfeasible(Route::CachedLocal))
    }
}

pub fn route2_bandwidth(config: &SystemConfig, cap_hz: f64) -> Result<f64> {
    let remote = config.task.input_remote_bits;
    let slack = config.task.deadline_s - config.local_compute_latency();
    if remote == 0.0 {
        return if slack >= 0.0 {
            Ok(0.0)
        } else {
            Err(Error::RouteInfeasible(Route::FetchedLocal))
        };
    }
    if slack <= 0.0 {
        return Err(Error::RouteInfeasible(Route::FetchedLocal));
    }
    let efficiency = config.downlink_efficiency();
    if efficiency <= 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let b2 = remote / (slack * efficiency);
    if b2.is_finite() && b2 <= cap_hz {
        Ok(b2)
    } else {
        Err(Error::RouteInfeasible(Route::FetchedLocal))
    }
}

pub fn route3_bandwidth(config: &SystemConfig, cap_hz: f64) -> Result<OffloadSplit> {
    let c = offload_coefficients(config)?;
    if c.a3 <= 0.0 {
        return Err(Error::RouteInfeasible(Route::Offloaded));
    }
    let split = kkt_split(c.a1, c.a2, c.a3)?;
    if split.total.is_finite() && split.total <= cap_hz {
        Ok(split)
    } else {
        Err(Error::RouteInfeasible(Route::Offloaded))
    }
}

/// Service latency of one task on `route` with the given bandwidths.
pub fn route_latency(route: Route, config: &SystemConfig, uplink_hz: f64, downlink_hz: f64) -> Result<f64> {
    let t = &config.task;
    let needs = |bits: f64, hz: f64, name: &str| -> Result<()> {
        if bits > 0.0 && (hz.is_nan() || hz <= 0.0) {
            Err(Error::invalid(name, "bandwidth must be > 0 when data is carried"))
        } else {
            Ok(())
        }
    };
    let transfer = |bits: f64, hz: f64, efficiency: f64| if bits == 0.0 { 0.0 } else { bits / (hz * efficiency) };
    match route {
        Route::CachedLocal => Ok(config.local_compute_latency()),
        Route::FetchedLocal => {
            needs(t.input_remote_bits, downlink_hz, "downlink_hz")?;
            Ok(transfer(t.input_remote_bits, downlink_hz, config.downlink_efficiency())
                + config.local_compute_latency())
        }
        Route::Offloaded => {
            needs(t.input_local_bits, uplink_hz, "uplink_hz")?;
            needs(t.output_bits, downlink_hz, "downlink_hz")?;
            Ok(transfer(t.input_local_bits, uplink_hz, config.uplink_efficiency())
                + config.server_compute_latency()
                + transfer(t.output_bits, downlink_hz, config.downlink_efficiency()))
        }
    }
}

/// Average device power one task contributes when served on `route`.
pub fn route_power(route: Route, config: &SystemConfig) -> Result<f64> {
    let k = config.power_coefficients()?;
    Ok(if route.is_local() { k.k1 } else { k.k2 })
}

/// Everything the count-level problem needs from one config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteCosts {
    pub b1: f64,
    /// `+∞` when route 2 is infeasible; check `route2_feasible`.
    pub b2: f64,
    /// `+∞` when route 3 is infeasible; check `route3_feasible`.
    pub b3: f64,
    pub bu3: f64,
    pub bd3: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub k1: f64,
    pub k2: f64,
    pub route1_feasible: bool,
    pub route2_feasible: bool,
    pub route3_feasible: bool,
}

impl RouteCosts {
    pub fn evaluate(config: &SystemConfig) -> Result<Self> {
        Self::evaluate_with_cap(config, DEFAULT_BANDWIDTH_CAP_HZ)
    }

    pub fn evaluate_with_cap(config: &SystemConfig, cap_hz: f64) -> Result<Self> {
        let k = config.power_coefficients()?;
        let coeffs = offload_coefficients(config)?;
        let route1_feasible = feasible(route1_bandwidth(config))?.is_some();
        let b2 = feasible(route2_bandwidth(config, cap_hz))?;
        let split = feasible(route3_bandwidth(config, cap_hz))?;
        Ok(RouteCosts {
            b1: 0.0,
            b2: b2.unwrap_or(f64::INFINITY),
            b3: split.map_or(f64::INFINITY, |s| s.total),
            bu3: split.map_or(f64::INFINITY, |s| s.uplink),
            bd3: split.map_or(f64::INFINITY, |s| s.downlink),
            a1: coeffs.a1,
            a2: coeffs.a2,
            a3: coeffs.a3,
            k1: k.k1,
            k2: k.k2,
            route1_feasible,
            route2_feasible: b2.is_some(),
            route3_feasible: split.is_some(),
        })
    }

    /// Per-task bandwidth of a route, `None` when latency-infeasible.
    pub fn cost(&self, route: Route) -> Option<f64> {
        match route {
            Route::CachedLocal => self.route1_feasible.then_some(self.b1),
            Route::FetchedLocal => self.route2_feasible.then_some(self.b2),
            Route::Offloaded => self.route3_feasible.then_some(self.b3),
        }
    }
}

fn feasible<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::RouteInfeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
