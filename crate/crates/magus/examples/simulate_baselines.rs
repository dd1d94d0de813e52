//! Pin the floor and the ceiling on a spiky trace and compare.
//!
//! The trace mimics a training loop: short memory bursts over a long
//! compute-bound tail. Pinning the uncore floor dilates the bursts but saves
//! package power the whole run; the comparison report puts numbers on that
//! trade.

use magus::baselines::StaticGovernor;
use magus::metrics::ComparisonReport;
use magus::simsys::{self, BandwidthModel, BandwidthShape, PowerModel, SystemModel};
use magus::telemetry::synth_training_spikes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SystemModel {
        f_min: 0.8e9,
        f_max: 2.2e9,
        bandwidth: BandwidthModel {
            bw_max: 22e9,
            shape: BandwidthShape::Linear,
        },
        power: PowerModel {
            p_pkg_idle: 30.0,
            p_core_active: 20.0,
            p_uncore_min: 8.0,
            p_uncore_max: 50.0,
            exponent: 1.0,
            p_gpu_active: 43.5,
            p_gpu_idle: 30.0,
            dram_w_per_gbps: 0.5,
        },
        step_cap: simsys::DEFAULT_STEP_CAP,
    };
    let trace = synth_training_spikes(1e9, 17.2e9, 1, 5, 20, 0.1)?;

    let mut ceiling = StaticGovernor::new(model.f_max, model.f_min, model.f_max)?;
    let mut floor = StaticGovernor::new(model.f_min, model.f_min, model.f_max)?;
    let fast = simsys::run(&trace, &mut ceiling, &model)?;
    let slow = simsys::run(&trace, &mut floor, &model)?;

    let idle = model.power.p_pkg_idle + model.power.p_gpu_idle;
    let report = ComparisonReport::from_runs("static_min", &slow, "static_max", &fast, idle)?;

    println!("trace: {} ({} steps)", trace.name, trace.entries.len());
    println!(
        "static_max: {:.2} s, {:.1} W pkg, {:.1} J total",
        fast.exec_time, fast.mean_pkg_power, fast.total_energy
    );
    println!(
        "static_min: {:.2} s, {:.1} W pkg, {:.1} J total",
        slow.exec_time, slow.mean_pkg_power, slow.total_energy
    );
    println!();
    println!("perf loss      {:>6.1} %", report.perf_loss_pct);
    println!("power saving   {:>6.1} %", report.power_saving_pct);
    println!("energy saving  {:>6.1} %", report.energy_saving_pct);
    println!("edp saving     {:>6.1} %", report.edp_saving_pct);
    Ok(())
}
