//! Throughput telemetry and workload traces.
//!
//! Everything downstream (governor, simulator, CLI) consumes the types in
//! this module: timestamped throughput samples, a bounded FIFO history
//! window, and demand traces with their CSV serialization and synthetic
//! generators.

use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

/// Bytes per gigabyte; traces and CLIs speak GB/s, internals use bytes/s.
pub const BYTES_PER_GB: f64 = 1e9;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("sample timestamp {next} does not advance past {prev}")]
    NonMonotonicTimestamp { prev: f64, next: f64 },
    #[error("invalid sample at t={timestamp}: {reason}")]
    InvalidSample { timestamp: f64, reason: String },
    #[error("trace parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("trace has no data rows")]
    EmptyTrace,
    #[error("trace is missing the `# period=<seconds>` metadata comment")]
    MissingPeriod,
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One throughput observation: seconds since an arbitrary epoch and an
/// achieved memory throughput in bytes per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputSample {
    pub timestamp: f64,
    pub throughput: f64,
}

impl ThroughputSample {
    pub fn new(timestamp: f64, throughput: f64) -> Result<Self, TelemetryError> {
        if !timestamp.is_finite() {
            return Err(TelemetryError::InvalidSample {
                timestamp,
                reason: "timestamp must be finite".into(),
            });
        }
        if !throughput.is_finite() || throughput < 0.0 {
            return Err(TelemetryError::InvalidSample {
                timestamp,
                reason: format!("throughput must be finite and >= 0, got {throughput}"),
            });
        }
        Ok(Self {
            timestamp,
            throughput,
        })
    }
}

/// Timestamped package and DRAM power reading in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub timestamp: f64,
    pub package_power: f64,
    pub dram_power: f64,
}

/// Timestamped instructions-per-cycle reading (or a proxy for it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpcSample {
    pub timestamp: f64,
    pub ipc: f64,
}

/// Fixed-capacity sliding window of throughput samples, oldest first.
///
/// Pushing into a full window evicts the oldest sample. Timestamps must be
/// strictly increasing.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    capacity: usize,
    samples: std::collections::VecDeque<ThroughputSample>,
}

impl HistoryWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "history window capacity must be at least 1");
        Self {
            capacity,
            samples: std::collections::VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, sample: ThroughputSample) -> Result<(), TelemetryError> {
        // Re-validate here so raw struct literals cannot sneak bad data in.
        let sample = ThroughputSample::new(sample.timestamp, sample.throughput)?;
        if let Some(last) = self.samples.back() {
            if sample.timestamp <= last.timestamp {
                return Err(TelemetryError::NonMonotonicTimestamp {
                    prev: last.timestamp,
                    next: sample.timestamp,
                });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn oldest(&self) -> Option<&ThroughputSample> {
        self.samples.front()
    }

    pub fn newest(&self) -> Option<&ThroughputSample> {
        self.samples.back()
    }

    /// Seconds covered by the window; zero with fewer than two samples.
    pub fn span(&self) -> f64 {
        match (self.oldest(), self.newest()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ThroughputSample> {
        self.samples.iter()
    }
}

/// One trace step: a memory throughput demand in bytes per second and the
/// fraction of the step that is frequency-insensitive compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub demand: f64,
    pub compute_weight: f64,
}

/// A workload expressed as a sequence of fixed-period demand steps.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadTrace {
    pub name: String,
    pub period: f64,
    pub entries: Vec<TraceEntry>,
}

impl WorkloadTrace {
    pub fn new(
        name: impl Into<String>,
        period: f64,
        entries: Vec<TraceEntry>,
    ) -> Result<Self, TelemetryError> {
        let trace = Self {
            name: name.into(),
            period,
            entries,
        };
        trace.validate()?;
        Ok(trace)
    }

    fn validate(&self) -> Result<(), TelemetryError> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(TelemetryError::InvalidTrace(format!(
                "period must be finite and > 0, got {}",
                self.period
            )));
        }
        if self.entries.is_empty() {
            return Err(TelemetryError::EmptyTrace);
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !e.demand.is_finite() || e.demand < 0.0 {
                return Err(TelemetryError::InvalidTrace(format!(
                    "entry {i}: demand must be finite and >= 0, got {}",
                    e.demand
                )));
            }
            if !e.compute_weight.is_finite() || !(0.0..=1.0).contains(&e.compute_weight) {
                return Err(TelemetryError::InvalidTrace(format!(
                    "entry {i}: compute_weight must lie in [0, 1], got {}",
                    e.compute_weight
                )));
            }
        }
        Ok(())
    }

    /// Nominal duration: steps times period, i.e. the run time when nothing
    /// is bandwidth starved.
    pub fn duration(&self) -> f64 {
        self.entries.len() as f64 * self.period
    }

    /// Returns the same trace with every entry's compute weight replaced.
    pub fn with_uniform_compute_weight(mut self, weight: f64) -> Result<Self, TelemetryError> {
        if !weight.is_finite() || !(0.0..=1.0).contains(&weight) {
            return Err(TelemetryError::InvalidParam(format!(
                "compute_weight must lie in [0, 1], got {weight}"
            )));
        }
        for e in &mut self.entries {
            e.compute_weight = weight;
        }
        Ok(self)
    }
}

const TRACE_HEADER: &str = "step,demand_gbps,compute_weight";

/// Parses a trace from CSV.
///
/// Expected shape: optional `# name=...` / `# period=...` metadata comments,
/// a `step,demand_gbps,compute_weight` header, then one row per step.
/// Other `#` comment lines are ignored. Demands are given in GB/s and
/// converted to bytes/s.
pub fn read_trace<R: BufRead>(reader: R) -> Result<WorkloadTrace, TelemetryError> {
    let mut name: Option<String> = None;
    let mut period: Option<f64> = None;
    let mut saw_header = false;
    let mut entries = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "name" => name = Some(value.trim().to_string()),
                    "period" => {
                        let p: f64 = value.trim().parse().map_err(|_| TelemetryError::Parse {
                            line: line_no,
                            reason: format!("period is not a number: {:?}", value.trim()),
                        })?;
                        period = Some(p);
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            if text != TRACE_HEADER {
                return Err(TelemetryError::Parse {
                    line: line_no,
                    reason: format!("expected header {TRACE_HEADER:?}, got {text:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(TelemetryError::Parse {
                line: line_no,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let _step: u64 = fields[0].parse().map_err(|_| TelemetryError::Parse {
            line: line_no,
            reason: format!("step is not an integer: {:?}", fields[0]),
        })?;
        let demand_gbps: f64 = fields[1].parse().map_err(|_| TelemetryError::Parse {
            line: line_no,
            reason: format!("demand_gbps is not a number: {:?}", fields[1]),
        })?;
        let compute_weight: f64 = fields[2].parse().map_err(|_| TelemetryError::Parse {
            line: line_no,
            reason: format!("compute_weight is not a number: {:?}", fields[2]),
        })?;
        if !demand_gbps.is_finite() || demand_gbps < 0.0 {
            return Err(TelemetryError::Parse {
                line: line_no,
                reason: format!("demand_gbps must be finite and >= 0, got {demand_gbps}"),
            });
        }
        if !compute_weight.is_finite() || !(0.0..=1.0).contains(&compute_weight) {
            return Err(TelemetryError::Parse {
                line: line_no,
                reason: format!("compute_weight must lie in [0, 1], got {compute_weight}"),
            });
        }
        entries.push(TraceEntry {
            demand: demand_gbps * BYTES_PER_GB,
            compute_weight,
        });
    }

    if !saw_header {
        return Err(TelemetryError::Parse {
            line: 1,
            reason: format!("missing {TRACE_HEADER:?} header"),
        });
    }
    if entries.is_empty() {
        return Err(TelemetryError::EmptyTrace);
    }
    let period = period.ok_or(TelemetryError::MissingPeriod)?;
    WorkloadTrace::new(name.unwrap_or_else(|| "trace".to_string()), period, entries)
}

pub fn read_trace_file(path: &Path) -> Result<WorkloadTrace, TelemetryError> {
    let file = std::fs::File::open(path)?;
    read_trace(std::io::BufReader::new(file))
}

/// Writes a trace in the CSV shape accepted by [`read_trace`].
pub fn write_trace<W: Write>(trace: &WorkloadTrace, mut writer: W) -> Result<(), TelemetryError> {
    writeln!(writer, "# name={}", trace.name)?;
    writeln!(writer, "# period={}", trace.period)?;
    writeln!(writer, "{TRACE_HEADER}")?;
    for (step, e) in trace.entries.iter().enumerate() {
        writeln!(
            writer,
            "{},{},{}",
            step,
            e.demand / BYTES_PER_GB,
            e.compute_weight
        )?;
    }
    Ok(())
}

pub fn write_trace_file(trace: &WorkloadTrace, path: &Path) -> Result<(), TelemetryError> {
    let mut file = std::fs::File::create(path)?;
    write_trace(trace, &mut file)
}

fn check_demand(what: &str, value: f64) -> Result<(), TelemetryError> {
    if !value.is_finite() || value < 0.0 {
        return Err(TelemetryError::InvalidParam(format!(
            "{what} must be finite and >= 0, got {value}"
        )));
    }
    Ok(())
}

fn check_pair(low: f64, high: f64) -> Result<(), TelemetryError> {
    check_demand("low", low)?;
    check_demand("high", high)?;
    if low > high {
        return Err(TelemetryError::InvalidParam(format!(
            "low ({low}) exceeds high ({high})"
        )));
    }
    Ok(())
}

fn check_period(period: f64) -> Result<(), TelemetryError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(TelemetryError::InvalidParam(format!(
            "period must be finite and > 0, got {period}"
        )));
    }
    Ok(())
}

/// Alternating blocks of `phase_len` steps at `low` then `high` bytes/s.
pub fn synth_phase_alternating(
    low: f64,
    high: f64,
    phase_len: usize,
    total: usize,
    period: f64,
) -> Result<WorkloadTrace, TelemetryError> {
    check_pair(low, high)?;
    check_period(period)?;
    if phase_len == 0 {
        return Err(TelemetryError::InvalidParam("phase_len must be > 0".into()));
    }
    if total == 0 {
        return Err(TelemetryError::InvalidParam("total must be > 0".into()));
    }
    let entries = (0..total)
        .map(|i| {
            let demand = if (i / phase_len).is_multiple_of(2) { low } else { high };
            TraceEntry {
                demand,
                compute_weight: 0.0,
            }
        })
        .collect();
    WorkloadTrace::new("phase-alternating", period, entries)
}

/// Demand toggling between `low` and `high` every `toggle_every` steps.
pub fn synth_oscillating(
    low: f64,
    high: f64,
    toggle_every: usize,
    total: usize,
    period: f64,
) -> Result<WorkloadTrace, TelemetryError> {
    if toggle_every == 0 {
        return Err(TelemetryError::InvalidParam(
            "toggle_every must be > 0".into(),
        ));
    }
    synth_phase_alternating(low, high, toggle_every, total, period).map(|mut t| {
        t.name = "oscillating".to_string();
        t
    })
}

/// Cycles of `cycle_len` steps holding `base`, except the leading
/// `spike_len` steps of each cycle at `spike` bytes/s.
pub fn synth_training_spikes(
    base: f64,
    spike: f64,
    spike_len: usize,
    cycle_len: usize,
    cycles: usize,
    period: f64,
) -> Result<WorkloadTrace, TelemetryError> {
    check_demand("base", base)?;
    check_demand("spike", spike)?;
    check_period(period)?;
    if cycle_len == 0 {
        return Err(TelemetryError::InvalidParam("cycle_len must be > 0".into()));
    }
    if spike_len >= cycle_len {
        return Err(TelemetryError::InvalidParam(format!(
            "spike_len ({spike_len}) must be smaller than cycle_len ({cycle_len})"
        )));
    }
    if cycles == 0 {
        return Err(TelemetryError::InvalidParam("cycles must be > 0".into()));
    }
    let entries = (0..cycles * cycle_len)
        .map(|i| {
            let demand = if i % cycle_len < spike_len {
                spike
            } else {
                base
            };
            TraceEntry {
                demand,
                compute_weight: 0.0,
            }
        })
        .collect();
    WorkloadTrace::new("training-spikes", period, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(t: f64, y: f64) -> ThroughputSample {
        ThroughputSample::new(t, y).unwrap()
    }

    #[test]
    fn window_evicts_oldest_first() {
        let mut w = HistoryWindow::new(3);
        for (t, y) in [(0.1, 1.0), (0.2, 2.0), (0.3, 3.0), (0.4, 4.0)] {
            w.push(sample(t, y)).unwrap();
        }
        assert_eq!(w.len(), 3);
        assert_eq!(w.oldest().unwrap().throughput, 2.0);
        assert_eq!(w.newest().unwrap().throughput, 4.0);
    }

    #[test]
    fn window_rejects_non_monotonic_timestamps() {
        let mut w = HistoryWindow::new(3);
        w.push(sample(0.2, 1.0)).unwrap();
        let err = w.push(sample(0.2, 2.0)).unwrap_err();
        assert!(matches!(err, TelemetryError::NonMonotonicTimestamp { .. }));
        let err = w.push(sample(0.1, 2.0)).unwrap_err();
        assert!(matches!(err, TelemetryError::NonMonotonicTimestamp { .. }));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn window_rejects_negative_throughput() {
        let mut w = HistoryWindow::new(2);
        let err = w
            .push(ThroughputSample {
                timestamp: 0.1,
                throughput: -1.0,
            })
            .unwrap_err();
        assert!(matches!(err, TelemetryError::InvalidSample { .. }));
    }

    #[test]
    fn window_span_covers_oldest_to_newest() {
        let mut w = HistoryWindow::new(4);
        assert_eq!(w.span(), 0.0);
        w.push(sample(0.5, 1.0)).unwrap();
        assert_eq!(w.span(), 0.0);
        w.push(sample(1.25, 1.0)).unwrap();
        assert_eq!(w.span(), 0.75);
    }

    #[test]
    fn read_trace_parses_rows_and_metadata() {
        let csv = "# name=unet\n# period=0.1\nstep,demand_gbps,compute_weight\n0,1.5,0.2\n1,20,0\n";
        let trace = read_trace(csv.as_bytes()).unwrap();
        assert_eq!(trace.name, "unet");
        assert_eq!(trace.period, 0.1);
        assert_eq!(trace.entries.len(), 2);
        // 1.5 GB/s becomes 1.5e9 bytes/s.
        assert_eq!(trace.entries[0].demand, 1.5e9);
        assert_eq!(trace.entries[0].compute_weight, 0.2);
        assert_eq!(trace.entries[1].demand, 2e10);
    }

    #[test]
    fn read_trace_ignores_plain_comments() {
        let csv = "# period=0.5\nstep,demand_gbps,compute_weight\n# mid-file note\n0,1,0\n";
        let trace = read_trace(csv.as_bytes()).unwrap();
        assert_eq!(trace.entries.len(), 1);
        assert_eq!(trace.name, "trace");
    }

    #[test]
    fn read_trace_errors_name_the_line() {
        let cases = [
            (
                "# period=0.1\nstep,demand_gbps,compute_weight\n0,-1,0\n",
                3,
                "demand",
            ),
            (
                "# period=0.1\nstep,demand_gbps,compute_weight\n0,1,0\n1,1,1.5\n",
                4,
                "compute_weight",
            ),
            (
                "# period=0.1\nstep,demand_gbps,compute_weight\n0,abc,0\n",
                3,
                "demand",
            ),
            (
                "# period=0.1\nstep,demand_gbps,compute_weight\nx,1,0\n",
                3,
                "step",
            ),
            (
                "# period=0.1\nstep,demand_gbps,compute_weight\n0,1\n",
                3,
                "fields",
            ),
            ("# period=0.1\n0,1,0\n", 2, "header"),
        ];
        for (csv, want_line, needle) in cases {
            match read_trace(csv.as_bytes()) {
                Err(TelemetryError::Parse { line, reason }) => {
                    assert_eq!(line, want_line, "line for input {csv:?}");
                    assert!(
                        reason.contains(needle),
                        "reason {reason:?} lacks {needle:?}"
                    );
                }
                other => panic!("expected parse error for {csv:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn read_trace_requires_rows_and_period() {
        let no_rows = "# period=0.1\nstep,demand_gbps,compute_weight\n";
        assert!(matches!(
            read_trace(no_rows.as_bytes()),
            Err(TelemetryError::EmptyTrace)
        ));
        let no_period = "step,demand_gbps,compute_weight\n0,1,0\n";
        assert!(matches!(
            read_trace(no_period.as_bytes()),
            Err(TelemetryError::MissingPeriod)
        ));
    }

    #[test]
    fn write_then_read_round_trips() {
        let trace = synth_training_spikes(1e9, 2e10, 1, 4, 3, 0.1)
            .unwrap()
            .with_uniform_compute_weight(0.25)
            .unwrap();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn phase_alternating_blocks_start_low() {
        let t = synth_phase_alternating(0.0, 1e10, 2, 6, 0.1).unwrap();
        let demands: Vec<f64> = t.entries.iter().map(|e| e.demand).collect();
        assert_eq!(demands, vec![0.0, 0.0, 1e10, 1e10, 0.0, 0.0]);
    }

    #[test]
    fn phase_alternating_truncates_at_total() {
        let t = synth_phase_alternating(1.0, 2.0, 4, 6, 0.1).unwrap();
        let demands: Vec<f64> = t.entries.iter().map(|e| e.demand).collect();
        assert_eq!(demands, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn oscillating_toggles_each_step() {
        let t = synth_oscillating(1e9, 2e10, 1, 4, 0.1).unwrap();
        let demands: Vec<f64> = t.entries.iter().map(|e| e.demand).collect();
        assert_eq!(demands, vec![1e9, 2e10, 1e9, 2e10]);
        assert_eq!(t.name, "oscillating");
    }

    #[test]
    fn oscillating_with_full_length_toggle_stays_low() {
        let t = synth_oscillating(1e9, 2e10, 4, 4, 0.1).unwrap();
        assert!(t.entries.iter().all(|e| e.demand == 1e9));
    }

    #[test]
    fn training_spikes_lead_each_cycle() {
        let t = synth_training_spikes(1e9, 2e10, 1, 4, 3, 0.1).unwrap();
        let demands: Vec<f64> = t.entries.iter().map(|e| e.demand).collect();
        let cycle = [2e10, 1e9, 1e9, 1e9];
        let want: Vec<f64> = cycle.iter().cycle().take(12).copied().collect();
        assert_eq!(demands, want);
    }

    #[test]
    fn generator_parameter_errors() {
        assert!(matches!(
            synth_phase_alternating(1.0, 2.0, 0, 4, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_phase_alternating(1.0, 2.0, 2, 0, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_phase_alternating(2.0, 1.0, 2, 4, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_oscillating(1.0, 2.0, 0, 4, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_training_spikes(1.0, 2.0, 4, 4, 1, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_training_spikes(1.0, 2.0, 1, 4, 0, 0.1),
            Err(TelemetryError::InvalidParam(_))
        ));
        assert!(matches!(
            synth_training_spikes(1.0, 2.0, 1, 4, 1, 0.0),
            Err(TelemetryError::InvalidParam(_))
        ));
    }

    #[test]
    fn trace_rejects_bad_weights_and_period() {
        assert!(WorkloadTrace::new(
            "t",
            0.0,
            vec![TraceEntry {
                demand: 1.0,
                compute_weight: 0.0
            }]
        )
        .is_err());
        assert!(WorkloadTrace::new("t", 0.1, vec![]).is_err());
        assert!(WorkloadTrace::new(
            "t",
            0.1,
            vec![TraceEntry {
                demand: 1.0,
                compute_weight: 1.1
            }]
        )
        .is_err());
        assert!(WorkloadTrace::new(
            "t",
            0.1,
            vec![TraceEntry {
                demand: -1.0,
                compute_weight: 0.0
            }]
        )
        .is_err());
    }

    // Demands on a 2^-10 GB/s grid convert to bytes/s and back without
    // rounding, so the round-trip can be checked for exact equality.
    fn grid_gbps() -> impl Strategy<Value = f64> {
        (0u32..=102_400).prop_map(|k| k as f64 / 1024.0)
    }

    fn grid_weight() -> impl Strategy<Value = f64> {
        (0u32..=1024).prop_map(|k| k as f64 / 1024.0)
    }

    proptest! {
        #[test]
        fn prop_trace_round_trip_exact(
            demands in proptest::collection::vec(grid_gbps(), 1..64),
            weights in proptest::collection::vec(grid_weight(), 1..64),
            period_ms in 1u32..=1000,
        ) {
            let entries: Vec<TraceEntry> = demands
                .iter()
                .zip(weights.iter().cycle())
                .map(|(&g, &w)| TraceEntry { demand: g * BYTES_PER_GB, compute_weight: w })
                .collect();
            let trace = WorkloadTrace::new("round-trip", period_ms as f64 / 1000.0, entries).unwrap();
            let mut buf = Vec::new();
            write_trace(&trace, &mut buf).unwrap();
            let back = read_trace(buf.as_slice()).unwrap();
            prop_assert_eq!(back, trace);
        }

        #[test]
        fn prop_window_never_exceeds_capacity(
            cap in 1usize..8,
            n in 0usize..32,
        ) {
            let mut w = HistoryWindow::new(cap);
            for i in 0..n {
                w.push(sample(0.1 * (i + 1) as f64, i as f64)).unwrap();
            }
            prop_assert!(w.len() <= cap);
            prop_assert_eq!(w.len(), n.min(cap));
            // Survivors are the most recent pushes, still in order.
            let got: Vec<f64> = w.iter().map(|s| s.throughput).collect();
            let want: Vec<f64> = (n.saturating_sub(cap)..n).map(|i| i as f64).collect();
            prop_assert_eq!(got, want);
        }
    }
}
