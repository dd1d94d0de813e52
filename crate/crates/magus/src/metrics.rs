//! Comparison metrics between a governed run and a baseline run.
//!
//! All percentages follow the same orientation: positive `perf_loss` means
//! the run was slower than the baseline, positive savings mean it used less.
//! Nothing is clamped; a governor that spends more power than its baseline
//! gets a negative saving.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simsys::SimResult;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{metric} baseline must be > 0, got {value}")]
    NonPositiveBaseline { metric: &'static str, value: f64 },
    #[error("{metric} must be finite and >= 0, got {value}")]
    InvalidValue { metric: &'static str, value: f64 },
    #[error("active power saving needs baseline power {baseline} above idle {idle}")]
    BaselineNotAboveIdle { baseline: f64, idle: f64 },
    #[error("measured power {power} lies below idle {idle}")]
    PowerBelowIdle { power: f64, idle: f64 },
}

fn check(metric: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MetricsError::InvalidValue { metric, value })
    }
}

fn check_baseline(metric: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MetricsError::NonPositiveBaseline { metric, value })
    }
}

/// Percent slowdown relative to the baseline execution time. Negative means
/// the run was faster.
pub fn perf_loss_pct(exec_time: f64, baseline_exec_time: f64) -> Result<f64, MetricsError> {
    check("exec_time", exec_time)?;
    check_baseline("exec_time", baseline_exec_time)?;
    Ok(100.0 * (exec_time - baseline_exec_time) / baseline_exec_time)
}

fn saving_pct(metric: &'static str, value: f64, baseline: f64) -> Result<f64, MetricsError> {
    check(metric, value)?;
    check_baseline(metric, baseline)?;
    Ok(100.0 * (baseline - value) / baseline)
}

/// Percent reduction in mean power relative to the baseline.
pub fn power_saving_pct(power: f64, baseline_power: f64) -> Result<f64, MetricsError> {
    saving_pct("power", power, baseline_power)
}

/// Percent reduction in energy relative to the baseline.
pub fn energy_saving_pct(energy: f64, baseline_energy: f64) -> Result<f64, MetricsError> {
    saving_pct("energy", energy, baseline_energy)
}

/// Percent reduction in energy-delay product relative to the baseline.
pub fn edp_saving_pct(edp: f64, baseline_edp: f64) -> Result<f64, MetricsError> {
    saving_pct("edp", edp, baseline_edp)
}

/// Energy-delay product.
pub fn edp(energy: f64, exec_time: f64) -> Result<f64, MetricsError> {
    check("energy", energy)?;
    check("exec_time", exec_time)?;
    Ok(energy * exec_time)
}

/// Percent reduction in power above idle. Subtracting the idle floor from
/// both sides isolates the part of the budget a frequency policy can
/// actually influence, so savings read larger than the raw power ratio.
pub fn active_power_saving_pct(
    power: f64,
    baseline_power: f64,
    idle_power: f64,
) -> Result<f64, MetricsError> {
    check("power", power)?;
    check("power", baseline_power)?;
    check("idle_power", idle_power)?;
    if baseline_power <= idle_power {
        return Err(MetricsError::BaselineNotAboveIdle {
            baseline: baseline_power,
            idle: idle_power,
        });
    }
    if power < idle_power {
        return Err(MetricsError::PowerBelowIdle {
            power,
            idle: idle_power,
        });
    }
    Ok(100.0 * (baseline_power - power) / (baseline_power - idle_power))
}

/// One governor's run summarized against a baseline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub governor: String,
    pub baseline: String,
    pub exec_time_s: f64,
    pub baseline_exec_time_s: f64,
    pub mean_total_power_w: f64,
    pub baseline_mean_total_power_w: f64,
    pub total_energy_j: f64,
    pub baseline_total_energy_j: f64,
    pub edp_js: f64,
    pub baseline_edp_js: f64,
    pub perf_loss_pct: f64,
    pub power_saving_pct: f64,
    /// Computed on mean total power with the model's idle floor removed.
    pub active_power_saving_pct: f64,
    pub energy_saving_pct: f64,
    pub edp_saving_pct: f64,
}

impl ComparisonReport {
    /// Derives every metric from two finished runs. `idle_power_w` is the
    /// model's whole-system idle floor used for the active power saving.
    pub fn from_runs(
        governor: &str,
        run: &SimResult,
        baseline: &str,
        base: &SimResult,
        idle_power_w: f64,
    ) -> Result<Self, MetricsError> {
        let mean_total = run.total_energy / run.exec_time;
        let base_mean_total = base.total_energy / base.exec_time;
        Ok(ComparisonReport {
            governor: governor.to_string(),
            baseline: baseline.to_string(),
            exec_time_s: run.exec_time,
            baseline_exec_time_s: base.exec_time,
            mean_total_power_w: mean_total,
            baseline_mean_total_power_w: base_mean_total,
            total_energy_j: run.total_energy,
            baseline_total_energy_j: base.total_energy,
            edp_js: run.edp,
            baseline_edp_js: base.edp,
            perf_loss_pct: perf_loss_pct(run.exec_time, base.exec_time)?,
            power_saving_pct: power_saving_pct(mean_total, base_mean_total)?,
            active_power_saving_pct: active_power_saving_pct(
                mean_total,
                base_mean_total,
                idle_power_w,
            )?,
            energy_saving_pct: energy_saving_pct(run.total_energy, base.total_energy)?,
            edp_saving_pct: edp_saving_pct(run.edp, base.edp)?,
        })
    }

    /// Two-column CSV (`metric,value_pct`) of the percentage metrics.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value_pct\n");
        for (name, value) in [
            ("perf_loss", self.perf_loss_pct),
            ("power_saving", self.power_saving_pct),
            ("active_power_saving", self.active_power_saving_pct),
            ("energy_saving", self.energy_saving_pct),
            ("edp_saving", self.edp_saving_pct),
        ] {
            out.push_str(&format!("{name},{value}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::governor::{CommandCause, FrequencyCommand};

    fn result(exec: f64, pkg: f64, gpu: f64) -> SimResult {
        let total = pkg + gpu;
        SimResult {
            exec_time: exec,
            pkg_energy: pkg,
            gpu_energy: gpu,
            total_energy: total,
            mean_pkg_power: pkg / exec,
            edp: total * exec,
            command_log: vec![(
                0.0,
                FrequencyCommand {
                    target: 1e9,
                    cause: CommandCause::Hold,
                },
            )],
            throughput_log: vec![(0.1, 1e9)],
        }
    }

    #[test]
    fn perf_loss_matches_the_slowdown_ratio() {
        let t = 2.0;
        let loss = perf_loss_pct(1.23 * t, t).unwrap();
        assert!((loss - 23.0).abs() < 1e-12 * 23.0);
    }

    #[test]
    fn faster_runs_report_negative_loss() {
        assert!((perf_loss_pct(0.9, 1.0).unwrap() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn power_saving_matches_the_reduction_ratio() {
        let p = 137.0;
        let s = power_saving_pct(0.58 * p, p).unwrap();
        assert!((s - 42.0).abs() < 1e-12 * 42.0);
    }

    #[test]
    fn energy_saving_matches_the_reduction_ratio() {
        let e = 1435.0;
        let s = energy_saving_pct(0.87 * e, e).unwrap();
        assert!((s - 13.0).abs() < 1e-12 * 13.0);
    }

    #[test]
    fn overspending_reports_negative_saving() {
        assert!((power_saving_pct(120.0, 100.0).unwrap() + 20.0).abs() < 1e-12);
    }

    #[test]
    fn active_saving_removes_the_idle_floor() {
        // 50 W saved out of a 100 W active budget.
        assert_eq!(active_power_saving_pct(150.0, 200.0, 100.0).unwrap(), 50.0);
        // The same delta without the floor is only 25%.
        assert_eq!(power_saving_pct(150.0, 200.0).unwrap(), 25.0);
    }

    #[test]
    fn active_saving_rejects_degenerate_floors() {
        assert_eq!(
            active_power_saving_pct(150.0, 90.0, 100.0),
            Err(MetricsError::BaselineNotAboveIdle {
                baseline: 90.0,
                idle: 100.0
            })
        );
        assert_eq!(
            active_power_saving_pct(80.0, 200.0, 100.0),
            Err(MetricsError::PowerBelowIdle {
                power: 80.0,
                idle: 100.0
            })
        );
    }

    #[test]
    fn edp_is_energy_times_time() {
        assert_eq!(edp(2.0, 3.0).unwrap(), 6.0);
        let s = edp_saving_pct(6.0, 12.0).unwrap();
        assert_eq!(s, 50.0);
    }

    #[test]
    fn zero_or_nan_baselines_are_rejected() {
        assert!(matches!(
            perf_loss_pct(1.0, 0.0),
            Err(MetricsError::NonPositiveBaseline { .. })
        ));
        assert!(matches!(
            power_saving_pct(f64::NAN, 100.0),
            Err(MetricsError::InvalidValue { .. })
        ));
        assert!(matches!(
            energy_saving_pct(1.0, f64::INFINITY),
            Err(MetricsError::NonPositiveBaseline { .. })
        ));
    }

    #[test]
    fn report_derives_all_percentages_from_runs() {
        // Baseline: 10 s at 200 W total. Run: 12.3 s at 116 W total.
        let base = result(10.0, 1400.0, 600.0);
        let run = result(12.3, 1000.0, 426.8);
        let rep = ComparisonReport::from_runs("magus", &run, "static_max", &base, 60.0).unwrap();
        assert!((rep.perf_loss_pct - 23.0).abs() < 1e-9);
        assert!((rep.mean_total_power_w - 116.0).abs() < 1e-9);
        assert!((rep.power_saving_pct - 42.0).abs() < 1e-9);
        assert!((rep.active_power_saving_pct - 60.0).abs() < 1e-9);
        assert!((rep.energy_saving_pct - (100.0 * (2000.0 - 1426.8) / 2000.0)).abs() < 1e-9);
    }

    #[test]
    fn report_round_trips_through_json() {
        let base = result(10.0, 1400.0, 600.0);
        let run = result(11.0, 1000.0, 430.0);
        let rep = ComparisonReport::from_runs("ups", &run, "static_max", &base, 60.0).unwrap();
        let text = serde_json::to_string_pretty(&rep).unwrap();
        let back: ComparisonReport = serde_json::from_str(&text).unwrap();
        assert_eq!(rep, back);
    }

    #[test]
    fn csv_lists_one_row_per_percentage() {
        let base = result(10.0, 1400.0, 600.0);
        let rep =
            ComparisonReport::from_runs("static_max", &base, "static_max", &base, 60.0).unwrap();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,value_pct");
        assert_eq!(lines.len(), 6);
        // Self-comparison is all zeros.
        assert!(lines[1..].iter().all(|l| l.ends_with(",0")));
    }
}
