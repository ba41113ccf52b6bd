//! Seeded random configurations for oracle comparisons.
//!
//! [`ConfigSampler::sample`] builds a physically consistent config aimed at a
//! chosen [`Regime`] by back-solving the physical parameters from target
//! values of `k1/k2`, `B3/B2`, `⌊C/I^S⌋` and the power bound on local tasks.
//! Fractional offsets keep every ratio at least 0.2 away from an integer so
//! the targeted regime survives floating-point recomputation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ChannelParams, DeviceParams, ServerParams, SystemConfig, TaskSpec};
use crate::policy::Regime;

/// Name of the generator behind every seeded run.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

pub struct ConfigSampler {
    rng: ChaCha8Rng,
    max_task_count: u64,
}

struct Targets {
    local_costlier: bool,
    fetch_cheaper: bool,
    /// Returns `(cache slots, local-task bound)` for a task count.
    orders: fn(&mut ChaCha8Rng, u64) -> (u64, u64),
}

fn targets(regime: Regime) -> Targets {
    use Regime::*;
    let (local_costlier, fetch_cheaper) = match regime {
        FetchPreferredPowerLimited | FetchPreferredCacheLimited | FetchPreferredPowerAmple => (true, true),
        OffloadPreferredPowerLimited | OffloadPreferredCacheLimited | OffloadPreferredPowerAmple => (true, false),
        UplinkCostlyLocalAlways => (false, true),
        UplinkCostlyPowerFloor | UplinkCostlyCacheCovered => (false, false),
    };
    let orders: fn(&mut ChaCha8Rng, u64) -> (u64, u64) = match regime {
        FetchPreferredPowerLimited | OffloadPreferredPowerLimited => |rng, f| {
            let slots = rng.gen_range(1..=f + 3);
            (slots, rng.gen_range(0..slots.min(f)))
        },
        FetchPreferredCacheLimited | OffloadPreferredCacheLimited => |rng, f| {
            let slots = rng.gen_range(0..f);
            (slots, rng.gen_range(slots..f))
        },
        FetchPreferredPowerAmple | OffloadPreferredPowerAmple => {
            |rng, f| (rng.gen_range(0..=f + 3), rng.gen_range(f..=3 * f))
        }
        UplinkCostlyLocalAlways => |rng, f| (rng.gen_range(0..=f + 3), rng.gen_range(0..=f)),
        UplinkCostlyPowerFloor => |rng, f| {
            let slots = rng.gen_range(0..f);
            (slots, rng.gen_range(slots + 1..=f))
        },
        UplinkCostlyCacheCovered => |rng, f| {
            let slots = rng.gen_range(0..=f + 3);
            (slots, rng.gen_range(0..=slots.min(f)))
        },
    };
    Targets {
        local_costlier,
        fetch_cheaper,
        orders,
    }
}

impl ConfigSampler {
    pub fn new(seed: u64, max_task_count: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_task_count: max_task_count.max(1),
        }
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo.ln()..hi.ln()).exp()
    }

    /// Round-robin over the nine regimes.
    pub fn sample_stratified(&mut self, index: usize) -> (Regime, SystemConfig) {
        let regime = Regime::ALL[index % Regime::ALL.len()];
        (regime, self.sample(regime))
    }

    /// A config whose optimal policy falls in `regime`, with all routes
    /// latency-feasible.
    pub fn sample(&mut self, regime: Regime) -> SystemConfig {
        let t = targets(regime);
        let f = self.rng.gen_range(1..=self.max_task_count);
        let deadline = self.rng.gen_range(0.05..2.0);
        let remote = self.log_uniform(1e5, 1e8);
        let cycles_per_bit = self.log_uniform(1.0, 1000.0);
        let local_fraction = self.rng.gen_range(0.1..0.9);
        let se_down = self.rng.gen_range(1.0..12.0);
        let ratio = if t.fetch_cheaper {
            self.rng.gen_range(1.1..4.0)
        } else {
            self.rng.gen_range(0.25..0.9)
        };
        let server_fraction = self.rng.gen_range(0.2..0.95);

        // Draw the local input and the uplink/downlink share until the
        // implied uplink spectral efficiency is reasonable.
        let (local_bits, se_up, a2, cycles) = loop {
            let local_bits = remote * self.log_uniform(0.01, 2.0);
            let cycles = (remote + local_bits) * cycles_per_bit;
            let b2 = remote / ((1.0 - local_fraction) * deadline * se_down);
            let a3 = server_fraction * deadline;
            let squared = ratio * b2 * a3;
            let share = self.rng.gen_range(0.2..0.8);
            let a1 = share * share * squared;
            let a2 = (1.0 - share) * (1.0 - share) * squared;
            let se_up = local_bits / a1;
            if (0.3..16.0).contains(&se_up) {
                break (local_bits, se_up, a2, cycles);
            }
        };
        let device_hz = cycles / (local_fraction * deadline);
        let server_hz = cycles / ((1.0 - server_fraction) * deadline);
        let output_bits = a2 * se_down;

        let gain = self.rng.gen_range(0.5..2.0);
        let uplink_psd = self.log_uniform(1e-8, 1e-5);
        let noise_psd = uplink_psd * gain * gain / (se_up.exp2() - 1.0);
        let downlink_psd = (se_down.exp2() - 1.0) * noise_psd / (gain * gain);

        let fc = f as f64;
        let k2 = uplink_psd * local_bits / (fc * deadline * se_up);
        let k_ratio = if t.local_costlier {
            self.rng.gen_range(1.2..5.0)
        } else {
            self.rng.gen_range(0.2..0.85)
        };
        let k1 = k_ratio * k2;
        let capacitance = k1 * deadline * fc / (device_hz * device_hz * cycles);

        let (slots, bound) = (t.orders)(&mut self.rng, f);
        let cache_frac = self.rng.gen_range(0.2..0.8);
        let cache_bits = (slots as f64 + cache_frac) * remote;
        let power_frac = self.rng.gen_range(0.2..0.8);
        let avg_power = if t.local_costlier {
            fc * k2 + (bound as f64 + power_frac) * (k1 - k2)
        } else {
            fc * k2 - (bound as f64 - power_frac) * (k2 - k1)
        };

        SystemConfig {
            task_count: f,
            task: TaskSpec {
                input_local_bits: local_bits,
                input_remote_bits: remote,
                output_bits,
                cycles_per_bit,
                deadline_s: deadline,
            },
            device: DeviceParams {
                cpu_hz: device_hz,
                switched_capacitance: capacitance,
                cache_bits,
                avg_power_w: avg_power,
                uplink_psd,
            },
            server: ServerParams {
                cpu_hz: server_hz,
                downlink_psd,
            },
            channel: ChannelParams {
                gain,
                noise_psd,
                snr_up_db: None,
                snr_down_db: None,
            },
        }
    }

    /// Independent draws over wide ranges; routes and power may be infeasible.
    pub fn sample_wild(&mut self) -> SystemConfig {
        let f = self.rng.gen_range(1..=self.max_task_count);
        let deadline = self.rng.gen_range(0.05..2.0);
        let remote = if self.rng.gen_bool(0.05) { 0.0 } else { self.log_uniform(1e4, 1e8) };
        let local_bits = if self.rng.gen_bool(0.05) { 0.0 } else { self.log_uniform(1e3, 1e8) };
        let output_bits = if self.rng.gen_bool(0.05) { 0.0 } else { self.log_uniform(1e3, 1e8) };
        let cycles_per_bit = self.log_uniform(0.5, 2000.0);
        let cycles = (remote + local_bits) * cycles_per_bit;
        let reference_hz = (cycles / deadline).max(1.0);
        let device_hz = reference_hz * self.log_uniform(0.7, 20.0);
        let server_hz = reference_hz * self.log_uniform(0.7, 50.0);
        let gain = self.log_uniform(0.1, 10.0);
        let noise_psd = self.log_uniform(1e-21, 1e-15);
        let uplink_psd = self.log_uniform(1e-9, 1e-5);
        let downlink_psd = self.log_uniform(1e-8, 1e-4);
        let snr_up_db = self.rng.gen_bool(0.2).then(|| self.rng.gen_range(-5.0..40.0));
        let snr_down_db = self.rng.gen_bool(0.2).then(|| self.rng.gen_range(-5.0..40.0));

        let se_up = match snr_up_db {
            Some(db) => crate::model::spectral_efficiency_db(db),
            None => (uplink_psd * gain * gain / noise_psd).ln_1p() / std::f64::consts::LN_2,
        };
        let fc = f as f64;
        let k2 = uplink_psd * local_bits / (fc * deadline * se_up);
        let k1_target = k2.max(1e-6) * self.log_uniform(0.1, 10.0);
        let capacitance = k1_target * deadline * fc / (device_hz * device_hz * cycles.max(1.0));
        let avg_power = fc * k1_target.max(k2) * self.log_uniform(0.2, 2.0);
        let cache_bits = remote.max(1.0) * fc * self.rng.gen_range(0.0..1.3);

        SystemConfig {
            task_count: f,
            task: TaskSpec {
                input_local_bits: local_bits,
                input_remote_bits: remote,
                output_bits,
                cycles_per_bit,
                deadline_s: deadline,
            },
            device: DeviceParams {
                cpu_hz: device_hz,
                switched_capacitance: capacitance,
                cache_bits,
                avg_power_w: avg_power,
                uplink_psd,
            },
            server: ServerParams {
                cpu_hz: server_hz,
                downlink_psd,
            },
            channel: ChannelParams {
                gain,
                noise_psd,
                snr_up_db,
                snr_down_db,
            },
        }
    }
}
