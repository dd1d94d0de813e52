//! Scenario files: a TOML description of one experiment.
//!
//! A scenario names a workload trace (either a CSV file or a synthetic
//! generator with its parameters), the system model, governor tuning, the
//! baseline governors' parameters, and the experiment layout (which
//! governors to run, which one is the baseline, where output goes).
//!
//! Parsing is strict (unknown keys are rejected), but semantic validation is
//! collected: [`ScenarioFile::validate`] returns every problem it can find
//! rather than stopping at the first, so a `validate` run fixes a file in
//! one pass.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::baselines::{StaticGovernor, TdpDefaultGovernor, UpsConfig, UpsGovernor};
use crate::governor::{Governor, GovernorConfig, MagusGovernor};
use crate::simsys::{BandwidthModel, BandwidthShape, PowerModel, SystemModel, DEFAULT_STEP_CAP};
use crate::telemetry::{
    read_trace_file, synth_oscillating, synth_phase_alternating, synth_training_spikes,
    WorkloadTrace, BYTES_PER_GB,
};

pub const GOVERNOR_NAMES: [&str; 5] = ["magus", "static_min", "static_max", "tdp_default", "ups"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Toml { path: PathBuf, message: String },
    #[error("scenario is invalid:\n  - {}", problems.join("\n  - "))]
    Diagnostics { problems: Vec<String> },
    #[error("unknown governor {name:?}; valid names: {}", GOVERNOR_NAMES.join(", "))]
    UnknownGovernor { name: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub file: Option<PathBuf>,
    pub generator: Option<String>,
    pub low_gbps: Option<f64>,
    pub high_gbps: Option<f64>,
    pub phase_len: Option<usize>,
    pub total: Option<usize>,
    pub toggle_every: Option<usize>,
    pub base_gbps: Option<f64>,
    pub spike_gbps: Option<f64>,
    pub spike_len: Option<usize>,
    pub cycle_len: Option<usize>,
    pub cycles: Option<usize>,
    pub period_s: Option<f64>,
    pub compute_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub bw_max_gbps: Option<f64>,
    pub shape: Option<String>,
    pub knee: Option<f64>,
    pub p_uncore_min_w: Option<f64>,
    pub p_uncore_max_w: Option<f64>,
    pub exponent: Option<f64>,
    pub p_core_active_w: Option<f64>,
    pub p_pkg_idle_w: Option<f64>,
    pub p_gpu_active_w: Option<f64>,
    pub p_gpu_idle_w: Option<f64>,
    pub dram_w_per_gbps: Option<f64>,
    pub step_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernorSpec {
    pub inc_threshold_gbps_per_s: Option<f64>,
    pub dec_threshold_gbps_per_s: Option<f64>,
    pub direv_length_s: Option<f64>,
    pub history_capacity: Option<usize>,
    pub high_freq_threshold: Option<f64>,
    pub tune_log_capacity: Option<usize>,
    pub f_min_ghz: Option<f64>,
    pub f_max_ghz: Option<f64>,
    pub sample_period_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub tdp_w: Option<f64>,
    pub tdp_margin: Option<f64>,
    pub ups_step_ghz: Option<f64>,
    pub ups_ipc_tolerance: Option<f64>,
    pub ups_dram_delta_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub governors: Option<Vec<String>>,
    pub baseline: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    #[serde(default)]
    pub trace: TraceSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub governor: GovernorSpec,
    #[serde(default)]
    pub baselines: BaselineSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

/// Baseline governor parameters in engineering units (W, Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub tdp_w: f64,
    pub tdp_margin: f64,
    pub ups_step_hz: f64,
    pub ups_ipc_tolerance: f64,
    pub ups_dram_delta_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub governors: Vec<String>,
    pub baseline: String,
    pub out_dir: PathBuf,
    pub repeats: usize,
}

/// A fully resolved scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub trace: WorkloadTrace,
    pub model: SystemModel,
    pub governor: GovernorConfig,
    pub baselines: BaselineParams,
    pub experiment: ExperimentParams,
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| ScenarioError::Toml {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads, validates, and resolves a scenario. Relative trace paths resolve
/// against the scenario file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let file = load_scenario_file(path)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    file.build(base_dir)
}

struct GeneratorParam {
    name: &'static str,
    set: bool,
    used_by: &'static [&'static str],
}

impl ScenarioFile {
    /// Every problem detectable without touching the filesystem.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        match &self.name {
            None => problems.push("name is required".to_string()),
            Some(n) if n.trim().is_empty() => problems.push("name must not be empty".to_string()),
            _ => {}
        }
        self.validate_trace(&mut problems);
        self.validate_model(&mut problems);
        if let Err(e) = self.governor_config().validate() {
            for v in e.violations {
                problems.push(format!("governor: {v}"));
            }
        }
        self.validate_baselines(&mut problems);
        self.validate_experiment(&mut problems);
        problems
    }

    fn validate_trace(&self, problems: &mut Vec<String>) {
        let t = &self.trace;
        match (&t.file, &t.generator) {
            (None, None) => {
                problems.push("trace: either file or generator is required".to_string())
            }
            (Some(_), Some(_)) => {
                problems.push("trace: file and generator are mutually exclusive".to_string())
            }
            _ => {}
        }
        let generator = t.generator.as_deref().unwrap_or("");
        if t.generator.is_some()
            && !["phase-alternating", "oscillating", "training-spikes"].contains(&generator)
        {
            problems.push(format!(
                "trace: unknown generator {generator:?}; valid: phase-alternating, oscillating, training-spikes"
            ));
        }
        let params = [
            GeneratorParam {
                name: "low_gbps",
                set: t.low_gbps.is_some(),
                used_by: &["phase-alternating", "oscillating"],
            },
            GeneratorParam {
                name: "high_gbps",
                set: t.high_gbps.is_some(),
                used_by: &["phase-alternating", "oscillating"],
            },
            GeneratorParam {
                name: "phase_len",
                set: t.phase_len.is_some(),
                used_by: &["phase-alternating"],
            },
            GeneratorParam {
                name: "total",
                set: t.total.is_some(),
                used_by: &["phase-alternating", "oscillating"],
            },
            GeneratorParam {
                name: "toggle_every",
                set: t.toggle_every.is_some(),
                used_by: &["oscillating"],
            },
            GeneratorParam {
                name: "base_gbps",
                set: t.base_gbps.is_some(),
                used_by: &["training-spikes"],
            },
            GeneratorParam {
                name: "spike_gbps",
                set: t.spike_gbps.is_some(),
                used_by: &["training-spikes"],
            },
            GeneratorParam {
                name: "spike_len",
                set: t.spike_len.is_some(),
                used_by: &["training-spikes"],
            },
            GeneratorParam {
                name: "cycle_len",
                set: t.cycle_len.is_some(),
                used_by: &["training-spikes"],
            },
            GeneratorParam {
                name: "cycles",
                set: t.cycles.is_some(),
                used_by: &["training-spikes"],
            },
        ];
        for p in &params {
            if p.set && !p.used_by.contains(&generator) {
                problems.push(format!(
                    "trace: parameter {} does not apply to this trace source",
                    p.name
                ));
            }
            if !p.set && p.used_by.contains(&generator) {
                problems.push(format!("trace: generator {generator} requires {}", p.name));
            }
        }
        if let Some(p) = t.period_s {
            if !(p.is_finite() && p > 0.0) {
                problems.push(format!("trace: period_s must be > 0, got {p}"));
            }
        }
        if let Some(w) = t.compute_weight {
            if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
                problems.push(format!("trace: compute_weight must lie in [0, 1], got {w}"));
            }
        }
        if let Some(p) = self.trace_period() {
            let sp = self.governor_config().sample_period;
            if (p - sp).abs() > 1e-9 * p.max(sp) {
                problems.push(format!(
                    "trace: period_s {p} does not match governor sample_period_s {sp}"
                ));
            }
        }
    }

    fn validate_model(&self, problems: &mut Vec<String>) {
        let m = &self.model;
        for (name, value) in [
            ("bw_max_gbps", m.bw_max_gbps),
            ("p_uncore_min_w", m.p_uncore_min_w),
            ("p_uncore_max_w", m.p_uncore_max_w),
            ("p_core_active_w", m.p_core_active_w),
            ("p_pkg_idle_w", m.p_pkg_idle_w),
            ("p_gpu_active_w", m.p_gpu_active_w),
            ("p_gpu_idle_w", m.p_gpu_idle_w),
        ] {
            if value.is_none() {
                problems.push(format!("model: {name} is required"));
            }
        }
        match m.shape.as_deref() {
            None => problems.push("model: shape is required (linear or saturating)".to_string()),
            Some("linear") => {
                if m.knee.is_some() {
                    problems.push("model: knee only applies to the saturating shape".to_string());
                }
            }
            Some("saturating") => {
                if m.knee.is_none() {
                    problems.push("model: the saturating shape requires knee".to_string());
                }
            }
            Some(other) => problems.push(format!(
                "model: unknown shape {other:?}; valid: linear, saturating"
            )),
        }
        if let Ok(model) = self.system_model() {
            if let Err(crate::simsys::SimError::InvalidModel { violations }) = model.validate() {
                for v in violations {
                    problems.push(format!("model: {v}"));
                }
            }
        }
    }

    fn validate_baselines(&self, problems: &mut Vec<String>) {
        let b = self.baseline_params();
        if !(b.tdp_w.is_finite() && b.tdp_w > 0.0) {
            problems.push(format!("baselines: tdp_w must be > 0, got {}", b.tdp_w));
        }
        if !(b.tdp_margin.is_finite() && (0.0..1.0).contains(&b.tdp_margin)) {
            problems.push(format!(
                "baselines: tdp_margin must lie in [0, 1), got {}",
                b.tdp_margin
            ));
        }
        if !(b.ups_step_hz.is_finite() && b.ups_step_hz > 0.0) {
            problems.push(format!(
                "baselines: ups_step_ghz must be > 0, got {}",
                b.ups_step_hz / 1e9
            ));
        }
        if !(b.ups_ipc_tolerance.is_finite() && (0.0..1.0).contains(&b.ups_ipc_tolerance)) {
            problems.push(format!(
                "baselines: ups_ipc_tolerance must lie in [0, 1), got {}",
                b.ups_ipc_tolerance
            ));
        }
        if !(b.ups_dram_delta_threshold.is_finite() && b.ups_dram_delta_threshold > 0.0) {
            problems.push(format!(
                "baselines: ups_dram_delta_threshold must be > 0, got {}",
                b.ups_dram_delta_threshold
            ));
        }
    }

    fn validate_experiment(&self, problems: &mut Vec<String>) {
        let e = self.experiment_params();
        if e.governors.is_empty() {
            problems.push("experiment: governors must not be empty".to_string());
        }
        for g in &e.governors {
            if !GOVERNOR_NAMES.contains(&g.as_str()) {
                problems.push(format!(
                    "experiment: unknown governor {g:?}; valid names: {}",
                    GOVERNOR_NAMES.join(", ")
                ));
            }
        }
        if !e.governors.contains(&e.baseline) {
            problems.push(format!(
                "experiment: baseline {:?} must be one of the governors being run",
                e.baseline
            ));
        }
        if e.repeats == 0 {
            problems.push("experiment: repeats must be >= 1".to_string());
        }
    }

    fn trace_period(&self) -> Option<f64> {
        if self.trace.file.is_some() {
            None
        } else {
            Some(self.trace.period_s.unwrap_or(0.1))
        }
    }

    /// Governor tuning in internal units (bytes, Hz, seconds).
    pub fn governor_config(&self) -> GovernorConfig {
        let d = GovernorConfig::default();
        let g = &self.governor;
        GovernorConfig {
            inc_threshold: g
                .inc_threshold_gbps_per_s
                .map_or(d.inc_threshold, |v| v * BYTES_PER_GB),
            dec_threshold: g
                .dec_threshold_gbps_per_s
                .map_or(d.dec_threshold, |v| v * BYTES_PER_GB),
            direv_length: g.direv_length_s.unwrap_or(d.direv_length),
            history_capacity: g.history_capacity.unwrap_or(d.history_capacity),
            high_freq_threshold: g.high_freq_threshold.unwrap_or(d.high_freq_threshold),
            tune_log_capacity: g.tune_log_capacity.unwrap_or(d.tune_log_capacity),
            f_min: g.f_min_ghz.map_or(d.f_min, |v| v * 1e9),
            f_max: g.f_max_ghz.map_or(d.f_max, |v| v * 1e9),
            sample_period: g.sample_period_s.unwrap_or(d.sample_period),
        }
    }

    fn system_model(&self) -> Result<SystemModel, ()> {
        let m = &self.model;
        let g = self.governor_config();
        let shape = match m.shape.as_deref() {
            Some("saturating") => BandwidthShape::Saturating {
                knee: m.knee.ok_or(())?,
            },
            _ => BandwidthShape::Linear,
        };
        Ok(SystemModel {
            f_min: g.f_min,
            f_max: g.f_max,
            bandwidth: BandwidthModel {
                bw_max: m.bw_max_gbps.ok_or(())? * BYTES_PER_GB,
                shape,
            },
            power: PowerModel {
                p_pkg_idle: m.p_pkg_idle_w.ok_or(())?,
                p_core_active: m.p_core_active_w.ok_or(())?,
                p_uncore_min: m.p_uncore_min_w.ok_or(())?,
                p_uncore_max: m.p_uncore_max_w.ok_or(())?,
                exponent: m.exponent.unwrap_or(1.0),
                p_gpu_active: m.p_gpu_active_w.ok_or(())?,
                p_gpu_idle: m.p_gpu_idle_w.ok_or(())?,
                dram_w_per_gbps: m.dram_w_per_gbps.unwrap_or(0.0),
            },
            step_cap: m.step_cap.unwrap_or(DEFAULT_STEP_CAP),
        })
    }

    pub fn baseline_params(&self) -> BaselineParams {
        let b = &self.baselines;
        BaselineParams {
            tdp_w: b.tdp_w.unwrap_or(475.0),
            tdp_margin: b.tdp_margin.unwrap_or(0.1),
            ups_step_hz: b.ups_step_ghz.map_or(0.1e9, |v| v * 1e9),
            ups_ipc_tolerance: b.ups_ipc_tolerance.unwrap_or(0.02),
            ups_dram_delta_threshold: b.ups_dram_delta_threshold.unwrap_or(0.2),
        }
    }

    pub fn experiment_params(&self) -> ExperimentParams {
        let e = &self.experiment;
        ExperimentParams {
            governors: e
                .governors
                .clone()
                .unwrap_or_else(|| vec!["magus".to_string(), "static_max".to_string()]),
            baseline: e
                .baseline
                .clone()
                .unwrap_or_else(|| "static_max".to_string()),
            out_dir: e.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            repeats: e.repeats.unwrap_or(1),
        }
    }

    /// Validates and resolves, loading or generating the trace.
    pub fn build(&self, base_dir: &Path) -> Result<Scenario, ScenarioError> {
        let mut problems = self.validate();
        let trace = if problems.is_empty() {
            match self.resolve_trace(base_dir) {
                Ok(t) => Some(t),
                Err(msg) => {
                    problems.push(msg);
                    None
                }
            }
        } else {
            None
        };
        if !problems.is_empty() {
            return Err(ScenarioError::Diagnostics { problems });
        }
        let trace = trace.expect("trace resolved when no problems were found");
        let governor = self.governor_config();
        if (trace.period - governor.sample_period).abs()
            > 1e-9 * trace.period.max(governor.sample_period)
        {
            return Err(ScenarioError::Diagnostics {
                problems: vec![format!(
                    "trace period {}s does not match governor sample_period_s {}",
                    trace.period, governor.sample_period
                )],
            });
        }
        Ok(Scenario {
            name: self.name.clone().unwrap_or_default(),
            trace,
            model: self.system_model().expect("model validated"),
            governor,
            baselines: self.baseline_params(),
            experiment: self.experiment_params(),
        })
    }

    fn resolve_trace(&self, base_dir: &Path) -> Result<WorkloadTrace, String> {
        let t = &self.trace;
        if let Some(file) = &t.file {
            let path = if file.is_absolute() {
                file.clone()
            } else {
                base_dir.join(file)
            };
            return read_trace_file(&path)
                .map_err(|e| format!("trace: cannot load {}: {e}", path.display()));
        }
        let period = t.period_s.unwrap_or(0.1);
        let gb = |v: f64| v * BYTES_PER_GB;
        let trace = match t.generator.as_deref() {
            Some("phase-alternating") => synth_phase_alternating(
                gb(t.low_gbps.unwrap()),
                gb(t.high_gbps.unwrap()),
                t.phase_len.unwrap(),
                t.total.unwrap(),
                period,
            ),
            Some("oscillating") => synth_oscillating(
                gb(t.low_gbps.unwrap()),
                gb(t.high_gbps.unwrap()),
                t.toggle_every.unwrap(),
                t.total.unwrap(),
                period,
            ),
            Some("training-spikes") => synth_training_spikes(
                gb(t.base_gbps.unwrap()),
                gb(t.spike_gbps.unwrap()),
                t.spike_len.unwrap(),
                t.cycle_len.unwrap(),
                t.cycles.unwrap(),
                period,
            ),
            _ => unreachable!("generator validated"),
        };
        let trace = trace.map_err(|e| format!("trace: {e}"))?;
        match t.compute_weight {
            Some(w) => trace
                .with_uniform_compute_weight(w)
                .map_err(|e| format!("trace: {e}")),
            None => Ok(trace),
        }
    }
}

impl Scenario {
    /// The whole-system idle floor used for active power savings.
    pub fn idle_power_w(&self) -> f64 {
        self.model.power.p_pkg_idle + self.model.power.p_gpu_idle
    }

    /// Instantiates a governor by name.
    pub fn make_governor(&self, name: &str) -> Result<Box<dyn Governor>, ScenarioError> {
        let g = &self.governor;
        let b = &self.baselines;
        let boxed: Box<dyn Governor> = match name {
            "magus" => Box::new(MagusGovernor::new(self.governor.clone()).map_err(|e| {
                ScenarioError::Diagnostics {
                    problems: vec![e.to_string()],
                }
            })?),
            "static_min" => {
                Box::new(StaticGovernor::new(g.f_min, g.f_min, g.f_max).map_err(|e| {
                    ScenarioError::Diagnostics {
                        problems: vec![e.to_string()],
                    }
                })?)
            }
            "static_max" => {
                Box::new(StaticGovernor::new(g.f_max, g.f_min, g.f_max).map_err(|e| {
                    ScenarioError::Diagnostics {
                        problems: vec![e.to_string()],
                    }
                })?)
            }
            "tdp_default" => Box::new(
                TdpDefaultGovernor::new(b.tdp_w, b.tdp_margin, g.f_min, g.f_max).map_err(|e| {
                    ScenarioError::Diagnostics {
                        problems: vec![e.to_string()],
                    }
                })?,
            ),
            "ups" => {
                let cfg = UpsConfig {
                    step: b.ups_step_hz,
                    ipc_tolerance: b.ups_ipc_tolerance,
                    dram_delta_threshold: b.ups_dram_delta_threshold,
                    ..UpsConfig::with_bounds(g.f_min, g.f_max)
                };
                Box::new(
                    UpsGovernor::new(cfg).map_err(|e| ScenarioError::Diagnostics {
                        problems: vec![e.to_string()],
                    })?,
                )
            }
            other => {
                return Err(ScenarioError::UnknownGovernor {
                    name: other.to_string(),
                })
            }
        };
        Ok(boxed)
    }
}
