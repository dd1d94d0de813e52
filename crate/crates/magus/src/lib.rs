//! Memory-throughput-driven uncore frequency scaling.
//!
//! The uncore (last-level cache, memory controllers, on-die interconnect)
//! burns a large slice of a server package's power budget, and the stock
//! policy of pinning it at the top frequency wastes most of that during
//! compute-heavy stretches. This crate implements a governor that watches
//! the derivative of achieved memory throughput, jumps the uncore between
//! its frequency bounds on sustained trends, and pins the top frequency when
//! tuning activity itself gets too busy, plus everything needed to evaluate
//! it: baseline governors, a trace-driven power and performance simulator,
//! comparison metrics, and a Linux sysfs actuation adapter.
//!
//! ## Examples
//!
//! The examples/ directory is the guided tour; each one is a small runnable
//! program around a single capability:
//!
//! - **`trend_prediction`** - Feed throughput samples to the governor by
//!   hand and watch the windowed derivative pick increase/decrease/hold
//! - **`high_freq_lock`** - An oscillating workload trips the tune-rate
//!   detector and locks the top frequency
//! - **`generate_traces`** - Write the synthetic workload CSVs to disk
//! - **`simulate_baselines`** - Run static governors on a spiky trace and
//!   compare power, performance, and energy
//! - **`governor_sweep`** - Every governor on one scenario, as a table
//! - **`fake_sysfs_loop`** - The full hardware control loop against a fake
//!   sysfs tree in a temp directory
//!
//! ```bash
//! cargo run --example trend_prediction
//! cargo run --example high_freq_lock
//! cargo run --example generate_traces
//! cargo run --example simulate_baselines
//! cargo run --example governor_sweep
//! cargo run --example fake_sysfs_loop
//! ```
//!
//! ## The `ufs` binary
//!
//! The same capabilities are scriptable through one thin binary:
//!
//! ```bash
//! ufs run --scenario scenarios/unet-calibration.toml --out results/
//! ufs trace gen oscillating --low-gbps 1 --high-gbps 7 \
//!     --toggle-every 1 --total 100 --out osc.csv
//! ufs validate --scenario scenarios/phase-alternating.toml
//! ufs hw run --hw --counter /sys/.../bytes_total   # needs root
//! ```
//!
//! ## Crate layout
//!
//! - [`telemetry`]: samples, sliding history window, trace CSV i/o,
//!   synthetic trace generators
//! - [`governor`]: the trend-following governor and its tuning knobs
//! - [`baselines`]: static, TDP-threshold, and utilization-ladder governors
//! - [`simsys`]: the closed-loop simulator and its bandwidth/power models
//! - [`metrics`]: per-run comparison percentages and reports
//! - [`scenario`]: TOML experiment descriptions
//! - [`hwadapter`]: sysfs discovery, pinning, and counter sampling
//! - [`cli`]: the `ufs` command tree

pub mod baselines;
pub mod cli;
pub mod governor;
pub mod hwadapter;
pub mod metrics;
pub mod scenario;
pub mod simsys;
pub mod telemetry;

pub use baselines::{StaticGovernor, TdpDefaultGovernor, UpsConfig, UpsGovernor};
pub use governor::{
    CommandCause, FrequencyCommand, Governor, GovernorConfig, GovernorError, MagusGovernor,
    Observation, TrendSignal,
};
pub use metrics::ComparisonReport;
pub use scenario::{load_scenario, Scenario, GOVERNOR_NAMES};
pub use simsys::{run, BandwidthModel, BandwidthShape, PowerModel, SimResult, SystemModel};
pub use telemetry::{ThroughputSample, TraceEntry, WorkloadTrace};
