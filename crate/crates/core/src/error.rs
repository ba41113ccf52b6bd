use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bandwidth::Route;

/// A single violated field invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldViolation {
    pub field: String,
    pub reason: String,
}

impl FieldViolation {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Constraint family that made a problem infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Power,
    Latency,
    Cache,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Power => "power",
            Constraint::Latency => "latency",
            Constraint::Cache => "cache",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field {0}")]
    InvalidField(FieldViolation),

    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<FieldViolation>),

    #[error("uplink spectral efficiency is zero while local input is non-empty")]
    DegenerateChannel,

    #[error("route {} is latency-infeasible", .0.index())]
    RouteInfeasible(Route),

    #[error("no policy satisfies the {0} constraint")]
    Infeasible(Constraint),

    #[error("invalid route counts: {0}")]
    InvalidCounts(String),

    #[error("task count {0} exceeds the enumeration limit")]
    TooLarge(u64),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField(FieldViolation::new(field, reason))
    }

    /// Stable machine-readable code used in CLI error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "invalid_field",
            Error::InvalidConfig(_) => "invalid_config",
            Error::DegenerateChannel => "degenerate_channel",
            Error::RouteInfeasible(_) => "route_infeasible",
            Error::Infeasible(_) => "infeasible",
            Error::InvalidCounts(_) => "invalid_counts",
            Error::TooLarge(_) => "too_large",
        }
    }
}

fn join(violations: &[FieldViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
