//! Bandwidth-optimal joint caching and computing for bidirectional
//! mobile-edge tasks.
//!
//! Each task combines device-generated input with Internet-originated input
//! that may be cached on the device. A task is served by one of three routes
//! (cached local computing, local computing after a download, or offloading
//! to the edge server), and the library picks how many tasks take each route
//! so the total bandwidth is minimal under cache, power and deadline limits.
//!
//! - [`model`]: configuration, validation, spectral efficiency, power coefficients
//! - [`bandwidth`]: per-route bandwidth, latency and power
//! - [`policy`]: closed-form optimal counts, regimes, assignments, baselines
//! - [`oracle`]: brute-force references and seeded verification
//! - [`tradeoff`]: turning points and parameter sweeps
//! - [`cli`]: the `edge3c` command-line front end

pub mod bandwidth;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod tradeoff;
pub mod units;

pub use bandwidth::{Route, RouteCosts};
pub use error::{Constraint, Error, FieldViolation, Result};
pub use model::{validate_config, SystemConfig};
pub use policy::{
    baseline_policy, classify_regime, expand_assignment, solve_optimal, Assignment, Baseline, CountProblem,
    PolicySolution, Regime,
};
pub use tradeoff::{detect_breakpoints, sweep, turning_points, SweepParam, SweepRow, SweepSpec, TurningPoints};
