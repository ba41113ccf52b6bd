//! System configuration: the task tuple, device, server and channel.
//!
//! All quantities are SI (bits, Hz, W, W/Hz, s). Task popularity is uniform,
//! `1/F` for each of the `F` tasks, so every task shares one tuple.

use std::f64::consts::LN_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldViolation, Result};
use crate::units;

/// Per-task data sizes, compute intensity and deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Real-time input generated on the device.
    #[serde(deserialize_with = "units::bits")]
    pub input_local_bits: f64,
    /// Internet-originated input; the cacheable part.
    #[serde(deserialize_with = "units::bits")]
    pub input_remote_bits: f64,
    #[serde(deserialize_with = "units::bits")]
    pub output_bits: f64,
    #[serde(deserialize_with = "units::plain")]
    pub cycles_per_bit: f64,
    #[serde(deserialize_with = "units::seconds")]
    pub deadline_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    #[serde(deserialize_with = "units::hertz")]
    pub cpu_hz: f64,
    /// Effective switched capacitance; energy per cycle is `μ f_D²`.
    #[serde(deserialize_with = "units::plain")]
    pub switched_capacitance: f64,
    #[serde(deserialize_with = "units::bits")]
    pub cache_bits: f64,
    #[serde(deserialize_with = "units::watts")]
    pub avg_power_w: f64,
    #[serde(deserialize_with = "units::psd")]
    pub uplink_psd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerParams {
    #[serde(deserialize_with = "units::hertz")]
    pub cpu_hz: f64,
    #[serde(deserialize_with = "units::psd")]
    pub downlink_psd: f64,
}

/// Static channel. The optional dB overrides replace the SNR that would
/// otherwise be derived from `psd · gain² / noise_psd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    #[serde(deserialize_with = "units::plain")]
    pub gain: f64,
    #[serde(deserialize_with = "units::psd")]
    pub noise_psd: f64,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "units::optional_decibels"
    )]
    pub snr_up_db: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "units::optional_decibels"
    )]
    pub snr_down_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub task_count: u64,
    pub task: TaskSpec,
    pub device: DeviceParams,
    pub server: ServerParams,
    pub channel: ChannelParams,
}

/// Per-task average device power for local computing (`k1`) and for
/// uplink transmission (`k2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerCoefficients {
    pub k1: f64,
    pub k2: f64,
}

/// `log2(1 + psd·gain²/noise_psd)` in bits/s/Hz.
pub fn spectral_efficiency(psd: f64, gain: f64, noise_psd: f64) -> Result<f64> {
    let mut violations = Vec::new();
    if !(psd.is_finite() && psd >= 0.0) {
        violations.push(FieldViolation::new("psd", "must be finite and >= 0"));
    }
    if !(gain.is_finite() && gain > 0.0) {
        violations.push(FieldViolation::new("gain", "must be finite and > 0"));
    }
    if !(noise_psd.is_finite() && noise_psd > 0.0) {
        violations.push(FieldViolation::new("noise_psd", "must be finite and > 0"));
    }
    if let Some(first) = violations.into_iter().next() {
        return Err(Error::InvalidField(first));
    }
    Ok(log2_1p(psd * gain * gain / noise_psd))
}

/// `log2(1 + 10^(snr_db/10))`.
pub fn spectral_efficiency_db(snr_db: f64) -> f64 {
    log2_1p(10f64.powf(snr_db / 10.0))
}

fn log2_1p(snr: f64) -> f64 {
    snr.ln_1p() / LN_2
}

/// Returns the config unchanged when every invariant holds, otherwise the
/// full list of violations.
pub fn validate_config(raw: SystemConfig) -> Result<SystemConfig> {
    raw.validate()
}

fn check(violations: &mut Vec<FieldViolation>, ok: bool, field: &str, reason: &str) {
    if !ok {
        violations.push(FieldViolation::new(field, reason));
    }
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl SystemConfig {
    /// Reads a JSON config, accepting SI numbers or human-unit strings.
    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: impl AsRef<Path>) -> std::result::Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(self) -> Result<Self> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut v = Vec::new();
        let t = &self.task;
        check(&mut v, self.task_count >= 1, "task_count", "must be >= 1");
        check(&mut v, non_negative(t.input_local_bits), "input_local_bits", "must be finite and >= 0");
        check(&mut v, non_negative(t.input_remote_bits), "input_remote_bits", "must be finite and >= 0");
        check(&mut v, non_negative(t.output_bits), "output_bits", "must be finite and >= 0");
        check(&mut v, non_negative(t.cycles_per_bit), "cycles_per_bit", "must be finite and >= 0");
        check(&mut v, positive(t.deadline_s), "deadline_s", "must be finite and > 0");

        let d = &self.device;
        check(&mut v, positive(d.cpu_hz), "device.cpu_hz", "must be finite and > 0");
        check(&mut v, non_negative(d.switched_capacitance), "switched_capacitance", "must be finite and >= 0");
        check(&mut v, non_negative(d.cache_bits), "cache_bits", "must be finite and >= 0");
        check(&mut v, positive(d.avg_power_w), "avg_power_w", "must be finite and > 0");
        check(&mut v, positive(d.uplink_psd), "uplink_psd", "must be finite and > 0");

        check(&mut v, positive(self.server.cpu_hz), "server.cpu_hz", "must be finite and > 0");
        check(&mut v, positive(self.server.downlink_psd), "downlink_psd", "must be finite and > 0");

        let c = &self.channel;
        check(&mut v, positive(c.gain), "gain", "must be finite and > 0");
        check(&mut v, positive(c.noise_psd), "noise_psd", "must be finite and > 0");
        if let Some(db) = c.snr_up_db {
            check(&mut v, db.is_finite(), "snr_up_db", "must be finite");
        }
        if let Some(db) = c.snr_down_db {
            check(&mut v, db.is_finite(), "snr_down_db", "must be finite");
        }
        v
    }

    /// Notes about overridden inputs; dB overrides win over PSD-derived SNRs.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.channel.snr_up_db.is_some() {
            out.push("snr_up_db overrides uplink_psd·gain²/noise_psd for the uplink SNR".to_string());
        }
        if self.channel.snr_down_db.is_some() {
            out.push(
                "snr_down_db overrides downlink_psd·gain²/noise_psd for the downlink SNR".to_string(),
            );
        }
        out
    }

    pub fn uplink_efficiency(&self) -> f64 {
        match self.channel.snr_up_db {
            Some(db) => spectral_efficiency_db(db),
            None => log2_1p(self.device.uplink_psd * self.channel.gain.powi(2) / self.channel.noise_psd),
        }
    }

    pub fn downlink_efficiency(&self) -> f64 {
        match self.channel.snr_down_db {
            Some(db) => spectral_efficiency_db(db),
            None => {
                log2_1p(self.server.downlink_psd * self.channel.gain.powi(2) / self.channel.noise_psd)
            }
        }
    }

    /// `(I^S + I^D)·w`, the cycles needed by one task.
    pub fn task_cycles(&self) -> f64 {
        (self.task.input_remote_bits + self.task.input_local_bits) * self.task.cycles_per_bit
    }

    pub fn local_compute_latency(&self) -> f64 {
        self.task_cycles() / self.device.cpu_hz
    }

    pub fn server_compute_latency(&self) -> f64 {
        self.task_cycles() / self.server.cpu_hz
    }

    pub fn power_coefficients(&self) -> Result<PowerCoefficients> {
        let f = self.task_count as f64;
        let tau = self.task.deadline_s;
        let k1 = self.device.switched_capacitance * self.device.cpu_hz.powi(2) * self.task_cycles()
            / (tau * f);
        let k2 = if self.task.input_local_bits == 0.0 {
            0.0
        } else {
            let se_up = self.uplink_efficiency();
            if se_up <= 0.0 {
                return Err(Error::DegenerateChannel);
            }
            self.device.uplink_psd * self.task.input_local_bits / (f * tau * se_up)
        };
        Ok(PowerCoefficients { k1, k2 })
    }
}
