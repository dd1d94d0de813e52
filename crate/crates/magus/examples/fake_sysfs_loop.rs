//! The full hardware control loop against a fake sysfs tree.
//!
//! Builds an intel_uncore_frequency lookalike in a temp directory, points a
//! byte counter at a scripted workload, and runs the governor's control loop
//! end to end: counter diff, decision, pin. The same wiring runs on real
//! hardware via `ufs hw run --hw` as root.

use std::fs;

use magus::governor::{GovernorConfig, MagusGovernor};
use magus::hwadapter::{discover_domains, ControlLoop, CounterFile, ThroughputReader};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = tempfile::tempdir()?;
    for name in ["package_00_die_00", "package_01_die_00"] {
        let dir = tree.path().join(name);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("min_freq_khz"), "800000\n")?;
        fs::write(dir.join("max_freq_khz"), "2200000\n")?;
        fs::write(dir.join("initial_min_freq_khz"), "800000\n")?;
        fs::write(dir.join("initial_max_freq_khz"), "2200000\n")?;
    }
    let counter_path = tree.path().join("bytes_total");
    fs::write(&counter_path, "0\n")?;

    let domains = discover_domains(tree.path())?;
    println!(
        "discovered {} domains under {}",
        domains.len(),
        tree.path().display()
    );
    for domain in &domains {
        if let Some((min, max)) = domain.hardware_range_khz()? {
            println!("  {}: {min}..{max} kHz", domain.dir().display());
        }
    }

    let mut governor = MagusGovernor::new(GovernorConfig::default())?;
    let reader = ThroughputReader::new(CounterFile::new(&counter_path));
    let mut control = ControlLoop::new(&mut governor, reader, domains);

    // Scripted counter increments per 100 ms round: a quiet stretch, then a
    // sustained surge, then quiet again.
    let deltas_bytes: [u64; 12] = [
        100_000_000,
        100_000_000,
        100_000_000,
        2_000_000_000,
        2_000_000_000,
        2_000_000_000,
        2_000_000_000,
        100_000_000,
        100_000_000,
        100_000_000,
        100_000_000,
        100_000_000,
    ];

    let mut total = 0u64;
    for (round, delta) in deltas_bytes.iter().enumerate() {
        total += delta;
        fs::write(&counter_path, format!("{total}\n"))?;
        let now = round as f64 * 0.1;
        match control.run_round(now)? {
            None => println!("round {round:>2}: arming counter baseline"),
            Some(command) => println!(
                "round {round:>2}: pinned {:.1} GHz ({})",
                command.target / 1e9,
                command.cause.as_str()
            ),
        }
    }

    let pinned = control.last_command().expect("loop ran");
    println!("\nfinal pin: {:.1} GHz", pinned.target / 1e9);
    Ok(())
}
