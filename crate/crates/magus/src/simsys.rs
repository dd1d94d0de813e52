//! Discrete-time closed-loop simulator.
//!
//! A run couples a governor to a workload trace through two small analytic
//! models. Each sampling slice the current frequency bounds memory bandwidth,
//! bandwidth bounds achieved throughput, and the governor observes what was
//! actually achieved (not what was demanded) before issuing the command for
//! the next slice. Work therefore dilates when the uncore is too slow, and
//! the energy ledger charges both the package and a GPU that stays active
//! until the workload finishes.
//!
//! Work model per trace entry: the entry nominally takes one period. A
//! `compute_weight` fraction of it advances at full rate regardless of
//! frequency; the rest advances at `achieved / demand`, so an entry demanding
//! twice the available bandwidth takes twice its nominal time.

use thiserror::Error;

use crate::governor::{CommandCause, FrequencyCommand, Governor, GovernorError};
use crate::telemetry::{
    IpcSample, PowerSample, TelemetryError, ThroughputSample, WorkloadTrace, BYTES_PER_GB,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid system model: {}", violations.join("; "))]
    InvalidModel { violations: Vec<String> },
    #[error("invalid trace: {0}")]
    Trace(#[from] TelemetryError),
    #[error("governor sample period {governor}s does not match trace period {trace}s")]
    PeriodMismatch { governor: f64, trace: f64 },
    #[error("simulation did not converge within {steps} slices; check demand vs bandwidth")]
    Divergence { steps: usize },
    #[error("governor commanded {freq} Hz outside [{f_min}, {f_max}]")]
    FrequencyOutOfRange { freq: f64, f_min: f64, f_max: f64 },
    #[error(transparent)]
    Governor(#[from] GovernorError),
}

/// How peak memory bandwidth scales with uncore frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthShape {
    /// Bandwidth proportional to frequency: `bw_max * freq / f_max`.
    Linear,
    /// Linear up to `knee * f_max`, then flat at `bw_max`.
    Saturating { knee: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthModel {
    /// Peak bandwidth at `f_max`, bytes/s.
    pub bw_max: f64,
    pub shape: BandwidthShape,
}

/// Power split in watts. Package power is idle + core + uncore; the GPU is
/// accounted separately; DRAM power is proxied as proportional to achieved
/// throughput and only feeds governors that want it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub p_pkg_idle: f64,
    pub p_core_active: f64,
    pub p_uncore_min: f64,
    pub p_uncore_max: f64,
    /// Curvature of uncore power in normalized frequency; 1 is linear.
    pub exponent: f64,
    pub p_gpu_active: f64,
    pub p_gpu_idle: f64,
    pub dram_w_per_gbps: f64,
}

/// Frequency range plus both models and the divergence guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    pub f_min: f64,
    pub f_max: f64,
    pub bandwidth: BandwidthModel,
    pub power: PowerModel,
    /// Abort a run after this many sampling slices.
    pub step_cap: usize,
}

pub const DEFAULT_STEP_CAP: usize = 10_000_000;

impl SystemModel {
    pub fn validate(&self) -> Result<(), SimError> {
        let mut violations = Vec::new();
        if !(self.f_min.is_finite()
            && self.f_min > 0.0
            && self.f_max.is_finite()
            && self.f_min < self.f_max)
        {
            violations.push(format!(
                "frequency bounds must satisfy 0 < f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            ));
        }
        if !(self.bandwidth.bw_max.is_finite() && self.bandwidth.bw_max > 0.0) {
            violations.push(format!("bw_max must be > 0, got {}", self.bandwidth.bw_max));
        }
        if let BandwidthShape::Saturating { knee } = self.bandwidth.shape {
            if !(knee.is_finite() && knee > 0.0 && knee <= 1.0) {
                violations.push(format!("saturating knee must lie in (0, 1], got {knee}"));
            }
        }
        let p = &self.power;
        for (name, value) in [
            ("p_pkg_idle", p.p_pkg_idle),
            ("p_core_active", p.p_core_active),
            ("p_uncore_min", p.p_uncore_min),
            ("p_gpu_active", p.p_gpu_active),
            ("p_gpu_idle", p.p_gpu_idle),
            ("dram_w_per_gbps", p.dram_w_per_gbps),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                violations.push(format!("{name} must be finite and >= 0, got {value}"));
            }
        }
        if !(p.p_uncore_max.is_finite() && p.p_uncore_max >= p.p_uncore_min) {
            violations.push(format!(
                "uncore power range must satisfy min <= max, got [{}, {}]",
                p.p_uncore_min, p.p_uncore_max
            ));
        }
        if !(p.exponent.is_finite() && p.exponent >= 1.0) {
            violations.push(format!("exponent must be >= 1, got {}", p.exponent));
        }
        if self.step_cap == 0 {
            violations.push("step_cap must be >= 1".to_string());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidModel { violations })
        }
    }

    fn check_freq(&self, freq: f64) -> Result<(), SimError> {
        if !(freq.is_finite() && (self.f_min..=self.f_max).contains(&freq)) {
            return Err(SimError::FrequencyOutOfRange {
                freq,
                f_min: self.f_min,
                f_max: self.f_max,
            });
        }
        Ok(())
    }

    /// Peak achievable bandwidth (bytes/s) at an uncore frequency in
    /// `[f_min, f_max]`.
    pub fn bandwidth_at(&self, freq: f64) -> Result<f64, SimError> {
        self.check_freq(freq)?;
        let ratio = freq / self.f_max;
        Ok(match self.bandwidth.shape {
            BandwidthShape::Linear => self.bandwidth.bw_max * ratio,
            BandwidthShape::Saturating { knee } => self.bandwidth.bw_max * (ratio / knee).min(1.0),
        })
    }

    /// Uncore power (W) at a frequency: interpolates between the endpoint
    /// powers with the configured curvature.
    pub fn uncore_power_at(&self, freq: f64) -> Result<f64, SimError> {
        self.check_freq(freq)?;
        let x = (freq - self.f_min) / (self.f_max - self.f_min);
        let p = &self.power;
        Ok(p.p_uncore_min + (p.p_uncore_max - p.p_uncore_min) * x.powf(p.exponent))
    }

    fn package_power_at(&self, freq: f64) -> Result<f64, SimError> {
        Ok(self.power.p_pkg_idle + self.power.p_core_active + self.uncore_power_at(freq)?)
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Wall-clock seconds until the last trace entry completed.
    pub exec_time: f64,
    /// Integrated package energy (J).
    pub pkg_energy: f64,
    /// Integrated GPU energy (J); the GPU is active for the whole run.
    pub gpu_energy: f64,
    /// pkg + gpu (J).
    pub total_energy: f64,
    /// pkg_energy / exec_time (W), i.e. time-weighted.
    pub mean_pkg_power: f64,
    /// total_energy * exec_time (J*s).
    pub edp: f64,
    /// `(timestamp, command)`: the setpoint at t=0 plus one entry per
    /// decision round. A command takes effect for the following slice.
    pub command_log: Vec<(f64, FrequencyCommand)>,
    /// `(slice end, achieved bytes/s averaged over the slice)`.
    pub throughput_log: Vec<(f64, f64)>,
}

/// Runs `governor` against `trace` under `model` until all work completes.
///
/// The sampling slice equals the trace period. Within a slice the frequency
/// is fixed; entries advance (possibly several per slice when leftovers
/// finish) and the byte counter integrates `min(demand, bandwidth)` over the
/// time spent on each entry. At every full slice boundary the governor sees
/// the achieved throughput, the slice's power, and a pace proxy for IPC,
/// then commands the frequency for the next slice.
pub fn run(
    trace: &WorkloadTrace,
    governor: &mut dyn Governor,
    model: &SystemModel,
) -> Result<SimResult, SimError> {
    model.validate()?;
    // Traces normally arrive validated, but the fields are public.
    WorkloadTrace::new(trace.name.clone(), trace.period, trace.entries.clone())?;
    if let Some(p) = governor.sample_period() {
        if (p - trace.period).abs() > 1e-9 * trace.period.max(p) {
            return Err(SimError::PeriodMismatch {
                governor: p,
                trace: trace.period,
            });
        }
    }

    let dt = trace.period;
    let mut freq = governor.initial_frequency();
    model.check_freq(freq)?;

    let mut command_log = vec![(
        0.0,
        FrequencyCommand {
            target: freq,
            cause: CommandCause::Hold,
        },
    )];
    let mut throughput_log = Vec::new();

    let mut idx = 0usize;
    let mut remaining = 1.0f64; // fraction of the current entry left
    let mut completed = 0usize;
    let mut t = 0.0f64;
    let mut pkg_energy = 0.0f64;
    let mut gpu_energy = 0.0f64;
    let mut slices = 0usize;
    let n = trace.entries.len();

    while idx < n {
        slices += 1;
        if slices > model.step_cap {
            return Err(SimError::Divergence {
                steps: model.step_cap,
            });
        }

        let bw = model.bandwidth_at(freq)?;
        let mut budget = dt;
        let mut bytes = 0.0f64;
        let mut progress = 0.0f64; // entry fractions advanced this slice

        while budget > 0.0 && idx < n {
            let entry = trace.entries[idx];
            let ratio = if entry.demand > 0.0 {
                (bw / entry.demand).min(1.0)
            } else {
                1.0
            };
            // Guard the ratio == 1 case so undilated entries take exactly
            // one period instead of drifting by an ulp of the weight sum.
            let pace = if ratio == 1.0 {
                1.0
            } else {
                entry.compute_weight + (1.0 - entry.compute_weight) * ratio
            };
            let rate = pace / dt;
            let achieved_rate = entry.demand.min(bw);
            let time_to_finish = remaining / rate;
            if time_to_finish <= budget {
                bytes += achieved_rate * time_to_finish;
                progress += remaining;
                budget -= time_to_finish;
                idx += 1;
                completed += 1;
                remaining = 1.0;
            } else {
                bytes += achieved_rate * budget;
                progress += rate * budget;
                remaining -= rate * budget;
                // Rounding can land exactly on zero even though the finish
                // time lay past the slice; count that as finishing at the
                // boundary rather than leaving a zero-length stub behind.
                if remaining <= 0.0 {
                    idx += 1;
                    completed += 1;
                    remaining = 1.0;
                }
                budget = 0.0;
            }
        }

        let elapsed = dt - budget;
        debug_assert!(elapsed > 0.0);
        let pkg_power = model.package_power_at(freq)?;
        pkg_energy += pkg_power * elapsed;
        gpu_energy += model.power.p_gpu_active * elapsed;
        t += elapsed;

        let achieved = bytes / elapsed;
        throughput_log.push((t, achieved));

        if idx < n {
            let pace_avg = progress * dt / elapsed;
            let obs = crate::governor::Observation {
                sample: ThroughputSample::new(t, achieved)?,
                power: Some(PowerSample {
                    timestamp: t,
                    package_power: pkg_power,
                    dram_power: model.power.dram_w_per_gbps * achieved / BYTES_PER_GB,
                }),
                ipc: Some(IpcSample {
                    timestamp: t,
                    ipc: pace_avg,
                }),
            };
            let command = governor.decide(&obs)?;
            model.check_freq(command.target)?;
            freq = command.target;
            command_log.push((t, command));
        }
    }

    debug_assert_eq!(completed, n, "every trace entry must complete exactly once");
    let exec_time = t;
    let total_energy = pkg_energy + gpu_energy;
    Ok(SimResult {
        exec_time,
        pkg_energy,
        gpu_energy,
        total_energy,
        mean_pkg_power: pkg_energy / exec_time,
        edp: total_energy * exec_time,
        command_log,
        throughput_log,
    })
}
