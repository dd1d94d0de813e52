//! An oscillating workload trips the tune-rate detector.
//!
//! Demand flips between 1 and 20 GB/s every round, so every decision is a
//! tune event. Once the event log fills past the busy threshold the governor
//! stops chasing the oscillation and pins the top frequency.

use magus::governor::{CommandCause, GovernorConfig, MagusGovernor};
use magus::telemetry::ThroughputSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GovernorConfig::default();
    let mut governor = MagusGovernor::new(cfg)?;

    let mut first_lock = None;
    for round in 0..30 {
        let gbps = if round % 2 == 0 { 1.0 } else { 20.0 };
        let t = round as f64 * 0.1;
        let command = governor.decide(ThroughputSample::new(t, gbps * 1e9)?)?;
        println!(
            "round {round:>2}  {gbps:>4.0} GB/s  ->  {:.1} GHz  {}",
            command.target / 1e9,
            command.cause.as_str()
        );
        if command.cause == CommandCause::HighFreqLock && first_lock.is_none() {
            first_lock = Some(round);
        }
    }

    match first_lock {
        Some(round) => {
            println!("\nlock engaged at round {round} and held; the uncore stops thrashing")
        }
        None => println!("\nlock never engaged (unexpected for this stream)"),
    }
    Ok(())
}
