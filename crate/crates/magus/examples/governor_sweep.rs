//! Every governor on one scenario, as a table.
//!
//! Loads the bundled phase-alternating scenario, runs each governor the
//! scenario knows how to build, and prints time, energy, and the savings
//! against the always-max baseline.

use std::path::Path;

use magus::metrics::{energy_saving_pct, perf_loss_pct};
use magus::scenario::{load_scenario, GOVERNOR_NAMES};
use magus::simsys;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join("phase-alternating.toml");
    let scenario = load_scenario(&path)?;
    println!(
        "scenario: {} ({} steps)\n",
        scenario.name,
        scenario.trace.entries.len()
    );

    let mut baseline_governor = scenario.make_governor("static_max")?;
    let baseline = simsys::run(&scenario.trace, baseline_governor.as_mut(), &scenario.model)?;

    println!(
        "{:<12} {:>9} {:>11} {:>11} {:>11}",
        "governor", "time (s)", "energy (J)", "loss (%)", "saving (%)"
    );
    for name in GOVERNOR_NAMES {
        let mut governor = scenario.make_governor(name)?;
        let result = simsys::run(&scenario.trace, governor.as_mut(), &scenario.model)?;
        let loss = perf_loss_pct(result.exec_time, baseline.exec_time)?;
        let saving = energy_saving_pct(result.total_energy, baseline.total_energy)?;
        println!(
            "{name:<12} {:>9.2} {:>11.1} {loss:>11.2} {saving:>11.2}",
            result.exec_time, result.total_energy
        );
    }
    Ok(())
}
