//! Feed throughput samples to the governor by hand and watch the windowed
//! derivative pick a direction.
//!
//! The stream ramps up hard, plateaus, then collapses; the governor reacts
//! with a jump to the ceiling, a string of holds, then a drop to the floor.

use magus::governor::{GovernorConfig, MagusGovernor};
use magus::telemetry::ThroughputSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GovernorConfig::default();
    println!(
        "thresholds: +{:.1e} / {:.1e} B/s/s over a {} s window\n",
        cfg.inc_threshold, cfg.dec_threshold, cfg.direv_length
    );
    let mut governor = MagusGovernor::new(cfg)?;

    // GB/s levels, one per 100 ms sample period.
    let levels = [
        1.0, 1.0, 4.0, 8.0, 12.0, 12.0, 12.0, 12.0, 3.0, 1.0, 1.0, 1.0,
    ];

    println!("{:>6}  {:>10}  {:>9}  cause", "t (s)", "GB/s", "GHz");
    for (round, gbps) in levels.iter().enumerate() {
        let t = round as f64 * 0.1;
        let sample = ThroughputSample::new(t, gbps * 1e9)?;
        let command = governor.decide(sample)?;
        println!(
            "{t:>6.1}  {gbps:>10.1}  {:>9.1}  {}",
            command.target / 1e9,
            command.cause.as_str()
        );
    }
    Ok(())
}
