//! The MAGUS uncore frequency governor.
//!
//! Each sampling period the governor ingests one achieved-throughput sample
//! and produces a frequency command from two signals:
//!
//! * a short-horizon throughput derivative that maps to increase / decrease /
//!   hold, where increase jumps straight to `f_max` and decrease straight to
//!   `f_min`, and
//! * the fraction of recent rounds that wanted a change. When that fraction
//!   reaches `high_freq_threshold` the demand is fluctuating faster than the
//!   hardware can usefully track, so the governor pins `f_max` until the
//!   fluctuation subsides.

use std::collections::VecDeque;

use thiserror::Error;

use crate::telemetry::{HistoryWindow, IpcSample, PowerSample, TelemetryError, ThroughputSample};

/// Relative slack applied to window-span comparisons so that periodic
/// timestamps accumulated in floating point still count as spanning a whole
/// number of periods.
const SPAN_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GovernorError {
    #[error("insufficient history: {len} samples spanning {span}s, need two spanning {required}s")]
    InsufficientHistory {
        len: usize,
        span: f64,
        required: f64,
    },
    #[error("tune event log is empty")]
    EmptyTuneLog,
    #[error("invalid governor config: {0}")]
    Config(#[from] ConfigError),
    #[error("stale input: no {missing} sample for this round; hold the previous command")]
    StaleData { missing: &'static str },
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}

#[derive(Debug, Error)]
#[error("{}", violations.join("; "))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

/// Tuning knobs for [`MagusGovernor`]. Frequencies are Hz, thresholds are
/// bytes/s per second of throughput derivative, durations are seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct GovernorConfig {
    pub inc_threshold: f64,
    pub dec_threshold: f64,
    /// Derivative horizon: the trend compares the newest sample against the
    /// earliest one within this many trailing seconds.
    pub direv_length: f64,
    pub history_capacity: usize,
    /// Fraction of logged rounds that must be tune events to enter the
    /// high-frequency lock. Inclusive: exactly the threshold locks.
    pub high_freq_threshold: f64,
    pub tune_log_capacity: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub sample_period: f64,
}

impl Default for GovernorConfig {
    fn default() -> Self {
        Self {
            inc_threshold: 1e9,
            dec_threshold: -1e9,
            direv_length: 0.1,
            history_capacity: 10,
            high_freq_threshold: 0.6,
            tune_log_capacity: 10,
            f_min: 0.8e9,
            f_max: 2.2e9,
            sample_period: 0.1,
        }
    }
}

impl GovernorConfig {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if !(self.inc_threshold.is_finite() && self.inc_threshold > 0.0) {
            violations.push(format!(
                "inc_threshold must be > 0, got {}",
                self.inc_threshold
            ));
        }
        if !(self.dec_threshold.is_finite() && self.dec_threshold < 0.0) {
            violations.push(format!(
                "dec_threshold must be < 0, got {}",
                self.dec_threshold
            ));
        }
        if !(self.direv_length.is_finite() && self.direv_length > 0.0) {
            violations.push(format!(
                "direv_length must be > 0, got {}",
                self.direv_length
            ));
        }
        if self.history_capacity < 2 {
            violations.push(format!(
                "history_capacity must be >= 2, got {}",
                self.history_capacity
            ));
        }
        if !(self.high_freq_threshold.is_finite()
            && self.high_freq_threshold > 0.0
            && self.high_freq_threshold <= 1.0)
        {
            violations.push(format!(
                "high_freq_threshold must lie in (0, 1], got {}",
                self.high_freq_threshold
            ));
        }
        if self.tune_log_capacity == 0 {
            violations.push("tune_log_capacity must be >= 1".to_string());
        }
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
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            violations.push(format!(
                "sample_period must be > 0, got {}",
                self.sample_period
            ));
        }
        if self.direv_length > self.history_capacity as f64 * self.sample_period {
            violations.push(format!(
                "direv_length ({}) exceeds the history window coverage ({} samples x {}s)",
                self.direv_length, self.history_capacity, self.sample_period
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendSignal {
    Increase,
    Decrease,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandCause {
    TrendIncrease,
    TrendDecrease,
    Hold,
    HighFreqLock,
}

impl CommandCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandCause::TrendIncrease => "trend_increase",
            CommandCause::TrendDecrease => "trend_decrease",
            CommandCause::Hold => "hold",
            CommandCause::HighFreqLock => "high_freq_lock",
        }
    }
}

impl std::str::FromStr for CommandCause {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trend_increase" => Ok(CommandCause::TrendIncrease),
            "trend_decrease" => Ok(CommandCause::TrendDecrease),
            "hold" => Ok(CommandCause::Hold),
            "high_freq_lock" => Ok(CommandCause::HighFreqLock),
            other => Err(format!("unknown command cause {other:?}")),
        }
    }
}

impl From<TrendSignal> for CommandCause {
    fn from(signal: TrendSignal) -> Self {
        match signal {
            TrendSignal::Increase => CommandCause::TrendIncrease,
            TrendSignal::Decrease => CommandCause::TrendDecrease,
            TrendSignal::Hold => CommandCause::Hold,
        }
    }
}

/// A target uncore frequency in Hz plus the reason it was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyCommand {
    pub target: f64,
    pub cause: CommandCause,
}

/// Bounded FIFO of binary tune flags: 1 when a round wanted a frequency
/// change, 0 when it held.
#[derive(Debug, Clone)]
pub struct TuneEventLog {
    capacity: usize,
    events: VecDeque<bool>,
}

impl TuneEventLog {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "tune event log capacity must be at least 1");
        Self {
            capacity,
            events: VecDeque::with_capacity(capacity),
        }
    }

    /// Appends the flag for one decision round, evicting the oldest entry
    /// once full.
    pub fn record(&mut self, signal: TrendSignal) {
        if self.events.len() == self.capacity {
            self.events.pop_front();
        }
        self.events.push_back(signal != TrendSignal::Hold);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.events.len() == self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.events.iter().copied()
    }

    fn mean(&self) -> f64 {
        let ones = self.events.iter().filter(|&&e| e).count();
        ones as f64 / self.events.len() as f64
    }
}

/// Short-horizon trend: the throughput derivative over the trailing
/// `direv_length` seconds, thresholded into a tuning signal.
///
/// The derivative is `(newest - earliest_in_window) / direv_length` where the
/// window is the trailing `direv_length` seconds of history. Comparisons are
/// strict, so a derivative exactly at a threshold holds.
pub fn predict_trend(
    config: &GovernorConfig,
    history: &HistoryWindow,
) -> Result<TrendSignal, GovernorError> {
    let tol = config.direv_length * SPAN_REL_TOL;
    let (oldest, newest) = match (history.oldest(), history.newest()) {
        (Some(a), Some(b)) if history.len() >= 2 => (a, b),
        _ => {
            return Err(GovernorError::InsufficientHistory {
                len: history.len(),
                span: history.span(),
                required: config.direv_length,
            })
        }
    };
    let span = newest.timestamp - oldest.timestamp;
    if span + tol < config.direv_length {
        return Err(GovernorError::InsufficientHistory {
            len: history.len(),
            span,
            required: config.direv_length,
        });
    }
    let cutoff = newest.timestamp - config.direv_length;
    let base = history
        .iter()
        .find(|s| s.timestamp + tol >= cutoff)
        .expect("window spans direv_length, so a sample lies inside it");
    let derivative = (newest.throughput - base.throughput) / config.direv_length;
    Ok(if derivative > config.inc_threshold {
        TrendSignal::Increase
    } else if derivative < config.dec_threshold {
        TrendSignal::Decrease
    } else {
        TrendSignal::Hold
    })
}

/// True when the logged tune-event rate reaches the threshold (inclusive).
/// Callers should treat a not-yet-full log as "not high frequency".
pub fn detect_high_freq(
    config: &GovernorConfig,
    log: &TuneEventLog,
) -> Result<bool, GovernorError> {
    if log.is_empty() {
        return Err(GovernorError::EmptyTuneLog);
    }
    Ok(log.mean() >= config.high_freq_threshold)
}

/// Maps a trend signal to a frequency: increase jumps to `f_max`, decrease
/// drops to `f_min`, hold keeps `current`.
pub fn target_frequency(signal: TrendSignal, config: &GovernorConfig, current: f64) -> f64 {
    match signal {
        TrendSignal::Increase => config.f_max,
        TrendSignal::Decrease => config.f_min,
        TrendSignal::Hold => current,
    }
}

/// Everything a governor may observe in one sampling round. Only the
/// throughput sample is mandatory; power and IPC feed the baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub sample: ThroughputSample,
    pub power: Option<PowerSample>,
    pub ipc: Option<IpcSample>,
}

impl Observation {
    pub fn throughput_only(sample: ThroughputSample) -> Self {
        Self {
            sample,
            power: None,
            ipc: None,
        }
    }
}

/// Per-round decision interface shared by MAGUS and the baseline governors.
pub trait Governor {
    /// Frequency in effect before the first decision round.
    fn initial_frequency(&self) -> f64;

    /// Consumes one observation and emits the next frequency command.
    fn decide(&mut self, obs: &Observation) -> Result<FrequencyCommand, GovernorError>;

    /// The sampling period this governor was tuned for, if it has one.
    fn sample_period(&self) -> Option<f64> {
        None
    }
}

/// Streaming MAGUS governor state.
#[derive(Debug, Clone)]
pub struct MagusGovernor {
    config: GovernorConfig,
    history: HistoryWindow,
    tune_log: TuneEventLog,
    current_target: f64,
    in_high_freq: bool,
}

impl MagusGovernor {
    /// Validates the config and starts at `f_min` with empty history, the
    /// uncore idle posture.
    pub fn new(config: GovernorConfig) -> Result<Self, GovernorError> {
        config.validate()?;
        Ok(Self {
            history: HistoryWindow::new(config.history_capacity),
            tune_log: TuneEventLog::new(config.tune_log_capacity),
            current_target: config.f_min,
            in_high_freq: false,
            config,
        })
    }

    pub fn config(&self) -> &GovernorConfig {
        &self.config
    }

    pub fn history(&self) -> &HistoryWindow {
        &self.history
    }

    pub fn tune_log(&self) -> &TuneEventLog {
        &self.tune_log
    }

    pub fn current_target(&self) -> f64 {
        self.current_target
    }

    pub fn in_high_freq(&self) -> bool {
        self.in_high_freq
    }

    /// One decision round: ingest the sample, derive the trend, log whether
    /// it asked for a change, then either follow the trend or, when the
    /// recent change rate is high, pin `f_max`.
    ///
    /// During warm-up (history too short for a trend) the round holds the
    /// current target and records no tune event.
    pub fn decide(&mut self, sample: ThroughputSample) -> Result<FrequencyCommand, GovernorError> {
        self.history.push(sample)?;
        let trend = match predict_trend(&self.config, &self.history) {
            Ok(signal) => {
                self.tune_log.record(signal);
                Some(signal)
            }
            Err(GovernorError::InsufficientHistory { .. }) => None,
            Err(e) => return Err(e),
        };
        let high = self.tune_log.is_full() && detect_high_freq(&self.config, &self.tune_log)?;
        let command = if high {
            // The lock overrides whatever this round's trend said.
            FrequencyCommand {
                target: self.config.f_max,
                cause: CommandCause::HighFreqLock,
            }
        } else {
            let signal = trend.unwrap_or(TrendSignal::Hold);
            FrequencyCommand {
                target: target_frequency(signal, &self.config, self.current_target),
                cause: signal.into(),
            }
        };
        self.current_target = command.target;
        self.in_high_freq = high;
        Ok(command)
    }
}

impl Governor for MagusGovernor {
    fn initial_frequency(&self) -> f64 {
        self.config.f_min
    }

    fn decide(&mut self, obs: &Observation) -> Result<FrequencyCommand, GovernorError> {
        MagusGovernor::decide(self, obs.sample)
    }

    fn sample_period(&self) -> Option<f64> {
        Some(self.config.sample_period)
    }
}
