//! Baseline governors used as comparison points for MAGUS.
//!
//! * [`StaticGovernor`] pins a single frequency.
//! * [`TdpDefaultGovernor`] mimics the stock package behaviour: full uncore
//!   speed until combined package + DRAM power closes in on TDP.
//! * [`UpsGovernor`] is a faithful-in-spirit reimplementation of the
//!   IPC/DRAM-power ladder scheme: step the uncore down while IPC holds up,
//!   step it up when IPC sags, and reset to `f_max` on a phase change. It is
//!   an approximation of the published scheme, not a port of its code.

use std::cmp::Ordering;

use thiserror::Error;

use crate::governor::{CommandCause, FrequencyCommand, Governor, GovernorError, Observation};

#[derive(Debug, Error)]
#[error("invalid baseline parameter: {0}")]
pub struct BaselineConfigError(pub String);

fn check_bounds(f_min: f64, f_max: f64) -> Result<(), BaselineConfigError> {
    if !(f_min.is_finite() && f_max.is_finite() && 0.0 < f_min && f_min < f_max) {
        return Err(BaselineConfigError(format!(
            "frequency bounds must satisfy 0 < f_min < f_max, got [{f_min}, {f_max}]"
        )));
    }
    Ok(())
}

fn cause_for_change(prev: f64, next: f64) -> CommandCause {
    match next.partial_cmp(&prev) {
        Some(Ordering::Greater) => CommandCause::TrendIncrease,
        Some(Ordering::Less) => CommandCause::TrendDecrease,
        _ => CommandCause::Hold,
    }
}

/// Pins one frequency forever; the trace has no influence on it.
#[derive(Debug, Clone)]
pub struct StaticGovernor {
    freq: f64,
}

impl StaticGovernor {
    pub fn new(freq: f64, f_min: f64, f_max: f64) -> Result<Self, BaselineConfigError> {
        check_bounds(f_min, f_max)?;
        if !(freq.is_finite() && (f_min..=f_max).contains(&freq)) {
            return Err(BaselineConfigError(format!(
                "static frequency {freq} outside [{f_min}, {f_max}]"
            )));
        }
        Ok(Self { freq })
    }

    pub fn frequency(&self) -> f64 {
        self.freq
    }
}

impl Governor for StaticGovernor {
    fn initial_frequency(&self) -> f64 {
        self.freq
    }

    fn decide(&mut self, _obs: &Observation) -> Result<FrequencyCommand, GovernorError> {
        Ok(FrequencyCommand {
            target: self.freq,
            cause: CommandCause::Hold,
        })
    }
}

/// Stock behaviour proxy: run the uncore at `f_max` until package + DRAM
/// power reaches `(1 - margin) * tdp`, then retreat to `f_min`. The target is
/// a pure function of the current power sample.
#[derive(Debug, Clone)]
pub struct TdpDefaultGovernor {
    tdp: f64,
    margin: f64,
    f_min: f64,
    f_max: f64,
    last_target: f64,
}

impl TdpDefaultGovernor {
    pub fn new(tdp: f64, margin: f64, f_min: f64, f_max: f64) -> Result<Self, BaselineConfigError> {
        check_bounds(f_min, f_max)?;
        if !(tdp.is_finite() && tdp > 0.0) {
            return Err(BaselineConfigError(format!("tdp must be > 0, got {tdp}")));
        }
        if !(margin.is_finite() && (0.0..1.0).contains(&margin)) {
            return Err(BaselineConfigError(format!(
                "margin must lie in [0, 1), got {margin}"
            )));
        }
        Ok(Self {
            tdp,
            margin,
            f_min,
            f_max,
            last_target: f_max,
        })
    }

    /// The frequency the stock policy picks for one power reading.
    pub fn target_for_power(&self, total_power: f64) -> f64 {
        if total_power < (1.0 - self.margin) * self.tdp {
            self.f_max
        } else {
            self.f_min
        }
    }
}

impl Governor for TdpDefaultGovernor {
    fn initial_frequency(&self) -> f64 {
        self.f_max
    }

    fn decide(&mut self, obs: &Observation) -> Result<FrequencyCommand, GovernorError> {
        let power = obs
            .power
            .ok_or(GovernorError::StaleData { missing: "power" })?;
        let target = self.target_for_power(power.package_power + power.dram_power);
        let cause = cause_for_change(self.last_target, target);
        self.last_target = target;
        Ok(FrequencyCommand { target, cause })
    }
}

/// Fallback used when a DRAM-power reference is ~0 W, so relative deltas
/// stay finite.
const DRAM_REF_FLOOR: f64 = 1e-9;

/// IPC/DRAM ladder configuration. Frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsConfig {
    /// Ladder step size per round.
    pub step: f64,
    /// Relative IPC slack: keep descending while ipc >= (1 - tol) * ref.
    pub ipc_tolerance: f64,
    /// Relative DRAM-power change that declares a new phase.
    pub dram_delta_threshold: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Frequency in effect before the first observation.
    pub initial_freq: f64,
}

impl UpsConfig {
    pub fn with_bounds(f_min: f64, f_max: f64) -> Self {
        Self {
            step: 0.1e9,
            ipc_tolerance: 0.02,
            dram_delta_threshold: 0.2,
            f_min,
            f_max,
            initial_freq: f_max,
        }
    }
}

/// Ladder governor keyed on IPC degradation with DRAM-power phase detection.
///
/// Per round: a DRAM-power swing past `dram_delta_threshold` resets to
/// `f_max` and re-baselines both references; otherwise IPC within tolerance
/// of the phase reference steps down, degraded IPC steps up. The first
/// observed round baselines the references.
#[derive(Debug, Clone)]
pub struct UpsGovernor {
    cfg: UpsConfig,
    current_freq: f64,
    reference: Option<Reference>,
}

#[derive(Debug, Clone, Copy)]
struct Reference {
    ipc: f64,
    dram_power: f64,
}

impl UpsGovernor {
    pub fn new(cfg: UpsConfig) -> Result<Self, BaselineConfigError> {
        check_bounds(cfg.f_min, cfg.f_max)?;
        if !(cfg.step.is_finite() && cfg.step > 0.0) {
            return Err(BaselineConfigError(format!(
                "step must be > 0, got {}",
                cfg.step
            )));
        }
        if !(cfg.ipc_tolerance.is_finite() && (0.0..1.0).contains(&cfg.ipc_tolerance)) {
            return Err(BaselineConfigError(format!(
                "ipc_tolerance must lie in [0, 1), got {}",
                cfg.ipc_tolerance
            )));
        }
        if !(cfg.dram_delta_threshold.is_finite() && cfg.dram_delta_threshold > 0.0) {
            return Err(BaselineConfigError(format!(
                "dram_delta_threshold must be > 0, got {}",
                cfg.dram_delta_threshold
            )));
        }
        if !(cfg.initial_freq.is_finite() && (cfg.f_min..=cfg.f_max).contains(&cfg.initial_freq)) {
            return Err(BaselineConfigError(format!(
                "initial_freq {} outside [{}, {}]",
                cfg.initial_freq, cfg.f_min, cfg.f_max
            )));
        }
        Ok(Self {
            current_freq: cfg.initial_freq,
            cfg,
            reference: None,
        })
    }

    pub fn current_freq(&self) -> f64 {
        self.current_freq
    }
}

impl Governor for UpsGovernor {
    fn initial_frequency(&self) -> f64 {
        self.cfg.initial_freq
    }

    fn decide(&mut self, obs: &Observation) -> Result<FrequencyCommand, GovernorError> {
        let power = obs
            .power
            .ok_or(GovernorError::StaleData { missing: "power" })?;
        let ipc = obs.ipc.ok_or(GovernorError::StaleData { missing: "ipc" })?;
        let prev = self.current_freq;
        let reference = *self.reference.get_or_insert(Reference {
            ipc: ipc.ipc,
            dram_power: power.dram_power,
        });

        let dram_delta = (power.dram_power - reference.dram_power).abs()
            / reference.dram_power.max(DRAM_REF_FLOOR);
        if dram_delta > self.cfg.dram_delta_threshold {
            // Phase change: sprint back to f_max and re-baseline.
            self.current_freq = self.cfg.f_max;
            self.reference = Some(Reference {
                ipc: ipc.ipc,
                dram_power: power.dram_power,
            });
        } else if ipc.ipc >= (1.0 - self.cfg.ipc_tolerance) * reference.ipc {
            self.current_freq = (self.current_freq - self.cfg.step).max(self.cfg.f_min);
        } else {
            self.current_freq = (self.current_freq + self.cfg.step).min(self.cfg.f_max);
        }
        Ok(FrequencyCommand {
            target: self.current_freq,
            cause: cause_for_change(prev, self.current_freq),
        })
    }
}
