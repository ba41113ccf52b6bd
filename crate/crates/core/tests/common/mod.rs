#![allow(dead_code)]

use std::path::PathBuf;

use edge3c::SystemConfig;

pub fn reference_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/reference.json")
}

pub fn reference_config() -> SystemConfig {
    SystemConfig::from_path(reference_path()).unwrap().validate().unwrap()
}

/// Config whose offloading coefficients are `(a1, a2, a3)` up to rounding:
/// both links run at 1 bit/s/Hz, no cacheable input, and the server takes
/// one second of the deadline.
pub fn config_for_triple(a1: f64, a2: f64, a3: f64) -> SystemConfig {
    let text = format!(
        r#"{{
            "task_count": 1,
            "task": {{"input_local_bits": {a1}, "input_remote_bits": 0, "output_bits": {a2},
                      "cycles_per_bit": 1, "deadline_s": {deadline}}},
            "device": {{"cpu_hz": 1e9, "switched_capacitance": 1e-27, "cache_bits": 0,
                        "avg_power_w": 1, "uplink_psd": 1}},
            "server": {{"cpu_hz": {a1}, "downlink_psd": 1}},
            "channel": {{"gain": 1, "noise_psd": 1, "snr_up_db": 0, "snr_down_db": 0}}
        }}"#,
        deadline = a3 + 1.0
    );
    SystemConfig::from_json_str(&text).unwrap().validate().unwrap()
}
