//! The `ufs` command line: simulator experiments, trace generation, scenario
//! validation, and a guarded hardware control loop.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad scenario,
//! unknown governor, mismatched periods), 3 for runtime failures
//! (divergence, hardware errors, i/o).

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::governor::{GovernorError, MagusGovernor};
use crate::hwadapter::{
    discover_domains, sysfs_base, ControlLoop, CounterFile, HwError, ThroughputReader,
};
use crate::metrics::{ComparisonReport, MetricsError};
use crate::scenario::{load_scenario, load_scenario_file, Scenario, ScenarioError, GOVERNOR_NAMES};
use crate::simsys::{self, SimError, SimResult};
use crate::telemetry::{
    synth_oscillating, synth_phase_alternating, synth_training_spikes, write_trace_file,
    TelemetryError, WorkloadTrace, BYTES_PER_GB,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Governor(#[from] GovernorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Hw(#[from] HwError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// 2 for anything the user can fix in a file or flag, 3 for failures at run
/// time.
pub fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) | CliError::Scenario(_) | CliError::Telemetry(_) => 2,
        CliError::Sim(e) => match e {
            SimError::Divergence { .. } | SimError::Governor(_) => 3,
            _ => 2,
        },
        CliError::Governor(GovernorError::Config(_)) => 2,
        CliError::Governor(_) | CliError::Metrics(_) | CliError::Hw(_) | CliError::Io { .. } => 3,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ufs",
    version,
    about = "Uncore frequency scaling: governors, simulation, and sysfs control"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run governors against a scenario in the simulator
    Run(RunArgs),
    /// Workload trace utilities
    Trace {
        #[command(subcommand)]
        cmd: TraceCmd,
    },
    /// Check a scenario file, printing every problem found
    Validate {
        /// Scenario TOML file
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Control real hardware through sysfs
    Hw {
        #[command(subcommand)]
        cmd: HwCmd,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario TOML file
    #[arg(long)]
    scenario: PathBuf,
    /// Governors to run (comma separated), overriding the scenario
    #[arg(long, value_delimiter = ',')]
    governor: Vec<String>,
    /// Baseline governor for comparisons, overriding the scenario
    #[arg(long)]
    baseline: Option<String>,
    /// Output directory, overriding the scenario
    #[arg(long)]
    out: Option<PathBuf>,
    /// Deterministic repeats aggregated by trimmed mean
    #[arg(long)]
    repeats: Option<usize>,
    /// Not valid here; hardware runs go through `ufs hw run`
    #[arg(long)]
    hw: bool,
}

#[derive(Debug, Subcommand)]
enum TraceCmd {
    /// Generate a synthetic trace CSV
    Gen {
        #[command(subcommand)]
        shape: GenCmd,
    },
}

#[derive(Debug, Subcommand)]
enum GenCmd {
    /// Long alternating low/high phases
    PhaseAlternating {
        #[arg(long)]
        low_gbps: f64,
        #[arg(long)]
        high_gbps: f64,
        /// Steps per phase
        #[arg(long)]
        phase_len: usize,
        /// Total steps
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 0.1)]
        period_s: f64,
        #[arg(long, default_value_t = 0.0)]
        compute_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rapid low/high toggling
    Oscillating {
        #[arg(long)]
        low_gbps: f64,
        #[arg(long)]
        high_gbps: f64,
        /// Steps between toggles
        #[arg(long)]
        toggle_every: usize,
        /// Total steps
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 0.1)]
        period_s: f64,
        #[arg(long, default_value_t = 0.0)]
        compute_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Periodic short bursts over a quiet baseline
    TrainingSpikes {
        #[arg(long)]
        base_gbps: f64,
        #[arg(long)]
        spike_gbps: f64,
        /// Burst length in steps
        #[arg(long)]
        spike_len: usize,
        /// Steps per cycle (burst + quiet)
        #[arg(long)]
        cycle_len: usize,
        /// Number of cycles
        #[arg(long)]
        cycles: usize,
        #[arg(long, default_value_t = 0.1)]
        period_s: f64,
        #[arg(long, default_value_t = 0.0)]
        compute_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum HwCmd {
    /// Run a governor against live sysfs uncore controls
    Run(HwRunArgs),
}

#[derive(Debug, Args)]
struct HwRunArgs {
    /// Acknowledge that this writes frequency limits on this machine
    #[arg(long)]
    hw: bool,
    /// Take governor tuning from this scenario's [governor] table
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Monotonic byte counter file to difference into throughput
    #[arg(long)]
    counter: PathBuf,
    /// Control rounds after the arming read
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    /// Seconds between rounds
    #[arg(long, default_value_t = 0.1)]
    period_s: f64,
}

/// Entry point for the `ufs` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Trace {
            cmd: TraceCmd::Gen { shape },
        } => cmd_trace_gen(shape),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Hw {
            cmd: HwCmd::Run(args),
        } => cmd_hw_run(args),
    }
}

/// One governor's aggregated run in report.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GovernorReport {
    pub name: String,
    pub exec_time_s: f64,
    pub pkg_energy_j: f64,
    pub gpu_energy_j: f64,
    pub total_energy_j: f64,
    pub mean_pkg_power_w: f64,
    pub mean_total_power_w: f64,
    pub edp_js: f64,
    pub comparison: ComparisonReport,
}

/// Top-level structure of report.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub trace: String,
    pub trace_steps: usize,
    pub baseline: String,
    pub repeats: usize,
    pub governors: Vec<GovernorReport>,
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    if args.hw {
        return Err(CliError::Usage(
            "`run` only simulates; use `ufs hw run --hw` for hardware".to_string(),
        ));
    }
    let mut scenario = load_scenario(&args.scenario)?;
    apply_overrides(&mut scenario, &args)?;
    let report = run_experiment(&scenario)?;
    let out_dir = scenario.experiment.out_dir.clone();
    write_outputs(&out_dir, &report.0, &report.1)?;
    for g in &report.0.governors {
        println!(
            "{}: exec {:.6} s, energy {:.3} J, mean pkg {:.3} W, perf_loss {:.2}%, energy_saving {:.2}%",
            g.name,
            g.exec_time_s,
            g.total_energy_j,
            g.mean_pkg_power_w,
            g.comparison.perf_loss_pct,
            g.comparison.energy_saving_pct,
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn apply_overrides(scenario: &mut Scenario, args: &RunArgs) -> Result<(), CliError> {
    if !args.governor.is_empty() {
        scenario.experiment.governors = args.governor.clone();
    }
    if let Some(b) = &args.baseline {
        scenario.experiment.baseline = b.clone();
    }
    if let Some(out) = &args.out {
        scenario.experiment.out_dir = out.clone();
    }
    if let Some(r) = args.repeats {
        if r == 0 {
            return Err(CliError::Usage("--repeats must be >= 1".to_string()));
        }
        scenario.experiment.repeats = r;
    }
    let e = &scenario.experiment;
    for name in &e.governors {
        if !GOVERNOR_NAMES.contains(&name.as_str()) {
            return Err(ScenarioError::UnknownGovernor { name: name.clone() }.into());
        }
    }
    let mut seen = Vec::new();
    for name in &e.governors {
        if seen.contains(&name) {
            return Err(CliError::Usage(format!("governor {name:?} listed twice")));
        }
        seen.push(name);
    }
    if !e.governors.contains(&e.baseline) {
        return Err(CliError::Usage(format!(
            "baseline {:?} is not among the governors being run ({})",
            e.baseline,
            e.governors.join(", ")
        )));
    }
    Ok(())
}

/// Sorts, drops the extremes when there are at least three values, and
/// averages the rest.
fn trimmed_mean(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let kept: &[f64] = if v.len() >= 3 { &v[1..v.len() - 1] } else { &v };
    kept.iter().sum::<f64>() / kept.len() as f64
}

fn aggregate(runs: Vec<SimResult>) -> SimResult {
    let exec: Vec<f64> = runs.iter().map(|r| r.exec_time).collect();
    let pkg: Vec<f64> = runs.iter().map(|r| r.pkg_energy).collect();
    let gpu: Vec<f64> = runs.iter().map(|r| r.gpu_energy).collect();
    let exec_time = trimmed_mean(&exec);
    let pkg_energy = trimmed_mean(&pkg);
    let gpu_energy = trimmed_mean(&gpu);
    let total_energy = pkg_energy + gpu_energy;
    let first = runs.into_iter().next().expect("at least one repeat");
    SimResult {
        exec_time,
        pkg_energy,
        gpu_energy,
        total_energy,
        mean_pkg_power: pkg_energy / exec_time,
        edp: total_energy * exec_time,
        command_log: first.command_log,
        throughput_log: first.throughput_log,
    }
}

type RunsByGovernor = Vec<(String, SimResult)>;

/// Runs every configured governor, aggregates repeats, and compares each one
/// against the baseline.
pub fn run_experiment(scenario: &Scenario) -> Result<(ExperimentReport, RunsByGovernor), CliError> {
    let e = &scenario.experiment;
    let mut results: RunsByGovernor = Vec::new();
    for name in &e.governors {
        let mut repeats = Vec::new();
        for _ in 0..e.repeats {
            let mut governor = scenario.make_governor(name)?;
            repeats.push(simsys::run(
                &scenario.trace,
                governor.as_mut(),
                &scenario.model,
            )?);
        }
        results.push((name.clone(), aggregate(repeats)));
    }
    let base = &results
        .iter()
        .find(|(n, _)| n == &e.baseline)
        .expect("baseline presence checked")
        .1
        .clone();
    let mut governors = Vec::new();
    for (name, result) in &results {
        let comparison =
            ComparisonReport::from_runs(name, result, &e.baseline, base, scenario.idle_power_w())?;
        governors.push(GovernorReport {
            name: name.clone(),
            exec_time_s: result.exec_time,
            pkg_energy_j: result.pkg_energy,
            gpu_energy_j: result.gpu_energy,
            total_energy_j: result.total_energy,
            mean_pkg_power_w: result.mean_pkg_power,
            mean_total_power_w: result.total_energy / result.exec_time,
            edp_js: result.edp,
            comparison,
        });
    }
    let report = ExperimentReport {
        scenario: scenario.name.clone(),
        trace: scenario.trace.name.clone(),
        trace_steps: scenario.trace.entries.len(),
        baseline: e.baseline.clone(),
        repeats: e.repeats,
        governors,
    };
    Ok((report, results))
}

fn create_file(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes report.json plus per-governor timeline and command CSVs. Floats
/// use shortest round-trip formatting, so the logs reproduce the in-memory
/// values exactly.
pub fn write_outputs(
    out_dir: &Path,
    report: &ExperimentReport,
    runs: &RunsByGovernor,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let report_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&report_path, json + "\n").map_err(|source| CliError::Io {
        path: report_path.clone(),
        source,
    })?;
    for (name, result) in runs {
        let timeline = out_dir.join(format!("timeline_{name}.csv"));
        let mut f = create_file(&timeline)?;
        let write_err = |source| CliError::Io {
            path: timeline.clone(),
            source,
        };
        writeln!(f, "t,achieved_gbps").map_err(write_err)?;
        for &(t, y) in &result.throughput_log {
            writeln!(f, "{t},{}", y / BYTES_PER_GB).map_err(write_err)?;
        }
        let commands = out_dir.join(format!("commands_{name}.csv"));
        let mut f = create_file(&commands)?;
        let write_err = |source| CliError::Io {
            path: commands.clone(),
            source,
        };
        writeln!(f, "t,freq_ghz,cause").map_err(write_err)?;
        for &(t, cmd) in &result.command_log {
            writeln!(f, "{t},{},{}", cmd.target / 1e9, cmd.cause.as_str()).map_err(write_err)?;
        }
    }
    Ok(())
}

fn cmd_trace_gen(shape: GenCmd) -> Result<(), CliError> {
    let gb = |v: f64| v * BYTES_PER_GB;
    let (trace, weight, out): (WorkloadTrace, f64, PathBuf) = match shape {
        GenCmd::PhaseAlternating {
            low_gbps,
            high_gbps,
            phase_len,
            total,
            period_s,
            compute_weight,
            out,
        } => (
            synth_phase_alternating(gb(low_gbps), gb(high_gbps), phase_len, total, period_s)?,
            compute_weight,
            out,
        ),
        GenCmd::Oscillating {
            low_gbps,
            high_gbps,
            toggle_every,
            total,
            period_s,
            compute_weight,
            out,
        } => (
            synth_oscillating(gb(low_gbps), gb(high_gbps), toggle_every, total, period_s)?,
            compute_weight,
            out,
        ),
        GenCmd::TrainingSpikes {
            base_gbps,
            spike_gbps,
            spike_len,
            cycle_len,
            cycles,
            period_s,
            compute_weight,
            out,
        } => (
            synth_training_spikes(
                gb(base_gbps),
                gb(spike_gbps),
                spike_len,
                cycle_len,
                cycles,
                period_s,
            )?,
            compute_weight,
            out,
        ),
    };
    let trace = trace.with_uniform_compute_weight(weight)?;
    write_trace_file(&trace, &out)?;
    println!(
        "wrote {} ({} steps, {} s)",
        out.display(),
        trace.entries.len(),
        trace.duration()
    );
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let file = load_scenario_file(path)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    match file.build(base_dir) {
        Ok(s) => {
            println!(
                "ok: {} ({} steps of {} s, {} governors, baseline {})",
                s.name,
                s.trace.entries.len(),
                s.trace.period,
                s.experiment.governors.len(),
                s.experiment.baseline
            );
            Ok(())
        }
        Err(ScenarioError::Diagnostics { problems }) => {
            eprintln!("invalid: {}", path.display());
            for p in &problems {
                eprintln!("  - {p}");
            }
            Err(CliError::Usage(format!(
                "{} problem(s) found",
                problems.len()
            )))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_hw_run(args: HwRunArgs) -> Result<(), CliError> {
    if !args.hw {
        return Err(CliError::Usage(
            "hw run changes live uncore limits; pass --hw to confirm".to_string(),
        ));
    }
    if !(args.period_s.is_finite() && args.period_s > 0.0) {
        return Err(CliError::Usage(format!(
            "--period-s must be > 0, got {}",
            args.period_s
        )));
    }
    let config = match &args.scenario {
        Some(path) => {
            let cfg = load_scenario_file(path)?.governor_config();
            cfg.validate().map_err(GovernorError::from)?;
            cfg
        }
        None => Default::default(),
    };
    let base = sysfs_base();
    let domains = discover_domains(&base)?;
    for domain in &domains {
        domain.check_writable()?;
    }
    eprintln!(
        "controlling {} domain(s) under {}",
        domains.len(),
        base.display()
    );

    let mut governor = MagusGovernor::new(config)?;
    let reader = ThroughputReader::new(CounterFile::new(&args.counter));
    let mut ctl = ControlLoop::new(&mut governor, reader, domains);
    let clock = Instant::now();
    println!("t,freq_ghz,cause");
    for round in 0..=args.rounds {
        if round > 0 {
            std::thread::sleep(std::time::Duration::from_secs_f64(args.period_s));
        }
        match ctl.run_round(clock.elapsed().as_secs_f64()) {
            Ok(Some(cmd)) => {
                println!(
                    "{},{},{}",
                    clock.elapsed().as_secs_f64(),
                    cmd.target / 1e9,
                    cmd.cause.as_str()
                );
            }
            Ok(None) => {}
            Err(HwError::CounterReset {
                previous, current, ..
            }) => {
                eprintln!("counter reset ({previous} -> {current}); skipping round");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
