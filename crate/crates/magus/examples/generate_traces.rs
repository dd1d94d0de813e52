//! Write the three synthetic workload shapes to CSV files.
//!
//! Each file is `step,demand_gbps,compute_weight` rows under `# name=` and
//! `# period=` comments, ready for `ufs run` via a scenario's `trace.file`
//! key.

use std::env;
use std::fs;

use magus::telemetry::{
    synth_oscillating, synth_phase_alternating, synth_training_spikes, write_trace_file,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = env::temp_dir().join("magus-traces");
    fs::create_dir_all(&out)?;

    let traces = [
        synth_phase_alternating(1e9, 16e9, 10, 200, 0.1)?,
        synth_oscillating(1e9, 7e9, 1, 100, 0.1)?,
        synth_training_spikes(1e9, 16e9, 2, 20, 10, 0.1)?,
    ];

    for trace in &traces {
        let path = out.join(format!("{}.csv", trace.name));
        write_trace_file(trace, &path)?;
        println!(
            "{:<50} {:>4} steps, {:>5.1} s",
            path.display(),
            trace.entries.len(),
            trace.duration()
        );
    }
    Ok(())
}
