//! End-to-end tests of the `ufs` binary: exit codes, output files, and the
//! hardware path against a fake sysfs tree.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magus::hwadapter::SYSFS_BASE_ENV;
use magus::telemetry::read_trace_file;

fn ufs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ufs"))
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

const SMALL_SCENARIO: &str = r#"
name = "small"

[trace]
generator = "oscillating"
low_gbps = 1.0
high_gbps = 7.0
toggle_every = 1
total = 40

[model]
bw_max_gbps = 22.0
shape = "linear"
p_uncore_min_w = 8.0
p_uncore_max_w = 50.0
exponent = 1.0
p_core_active_w = 20.0
p_pkg_idle_w = 30.0
p_gpu_active_w = 43.5
p_gpu_idle_w = 30.0
dram_w_per_gbps = 0.5

[experiment]
governors = ["magus", "static_max"]
baseline = "static_max"
out_dir = "out/small"
"#;

#[test]
fn run_writes_report_and_per_governor_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("small.toml");
    fs::write(&scenario, SMALL_SCENARIO).unwrap();
    let out_dir = tmp.path().join("results");

    let out = ufs()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "small");
    assert_eq!(report["baseline"], "static_max");
    let governors = report["governors"].as_array().unwrap();
    let names: Vec<&str> = governors
        .iter()
        .map(|g| g["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["magus", "static_max"]);
    for g in governors {
        assert!(g["exec_time_s"].as_f64().unwrap() > 0.0);
        assert!(g["total_energy_j"].as_f64().unwrap() > 0.0);
    }

    for name in ["magus", "static_max"] {
        let timeline = fs::read_to_string(out_dir.join(format!("timeline_{name}.csv"))).unwrap();
        assert!(timeline.starts_with("t,achieved_gbps\n"));
        assert!(
            timeline.lines().count() > 10,
            "{name} timeline too short:\n{timeline}"
        );
        let commands = fs::read_to_string(out_dir.join(format!("commands_{name}.csv"))).unwrap();
        assert!(commands.starts_with("t,freq_ghz,cause\n"));
        assert!(commands.contains("hold"));
    }

    assert!(stdout_of(&out).contains("magus:"), "summary line missing");
}

#[test]
fn run_accepts_governor_and_baseline_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("small.toml");
    fs::write(&scenario, SMALL_SCENARIO).unwrap();
    let out_dir = tmp.path().join("results");

    let out = ufs()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args([
            "--governor",
            "static_min,static_max",
            "--baseline",
            "static_min",
        ])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["baseline"], "static_min");
    assert!(out_dir.join("timeline_static_min.csv").exists());
    assert!(!out_dir.join("timeline_magus.csv").exists());
}

#[test]
fn run_with_unknown_governor_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("small.toml");
    fs::write(&scenario, SMALL_SCENARIO).unwrap();

    let out = ufs()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--governor", "warp_drive"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("warp_drive"));
}

#[test]
fn run_rejects_the_hw_flag_with_guidance() {
    let out = ufs()
        .args(["run", "--scenario"])
        .arg(scenario_path("oscillating.toml"))
        .arg("--hw")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("ufs hw run"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn run_reports_divergence_as_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("diverge.toml");
    fs::write(
        &scenario,
        SMALL_SCENARIO.replace(
            "dram_w_per_gbps = 0.5",
            "dram_w_per_gbps = 0.5\nstep_cap = 3",
        ),
    )
    .unwrap();

    let out = ufs()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("3 slices"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn trace_gen_writes_a_parseable_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("osc.csv");
    let out = ufs()
        .args(["trace", "gen", "oscillating"])
        .args([
            "--low-gbps",
            "1",
            "--high-gbps",
            "7",
            "--toggle-every",
            "1",
            "--total",
            "20",
        ])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let trace = read_trace_file(&path).unwrap();
    assert_eq!(trace.entries.len(), 20);
    assert_eq!(trace.period, 0.1);
    assert_eq!(trace.entries[0].demand, 1e9);
    assert_eq!(trace.entries[1].demand, 7e9);
}

#[test]
fn trace_gen_rejects_bad_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ufs()
        .args(["trace", "gen", "training-spikes"])
        .args(["--base-gbps", "1", "--spike-gbps", "16"])
        .args(["--spike-len", "5", "--cycle-len", "5", "--cycles", "10"])
        .arg("--out")
        .arg(tmp.path().join("bad.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("spike_len"));
}

#[test]
fn validate_accepts_the_bundled_scenarios() {
    for name in [
        "unet-calibration.toml",
        "phase-alternating.toml",
        "oscillating.toml",
        "training-spikes.toml",
    ] {
        let out = ufs()
            .args(["validate", "--scenario"])
            .arg(scenario_path(name))
            .output()
            .unwrap();
        assert!(out.status.success(), "{name} stderr: {}", stderr_of(&out));
        assert!(
            stdout_of(&out).starts_with("ok:"),
            "{name} stdout: {}",
            stdout_of(&out)
        );
    }
}

#[test]
fn validate_lists_every_problem_and_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("broken.toml");
    fs::write(
        &scenario,
        "[trace]\ngenerator = \"oscillating\"\n\n[model]\nshape = \"saturating\"\n",
    )
    .unwrap();

    let out = ufs()
        .args(["validate", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("invalid:"), "stderr: {err}");
    assert!(
        err.matches("  - ").count() >= 3,
        "expected several problems, got:\n{err}"
    );
}

#[test]
fn validate_rejects_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("typo.toml");
    fs::write(&scenario, SMALL_SCENARIO.replace("low_gbps", "low_gpbs")).unwrap();

    let out = ufs()
        .args(["validate", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("low_gpbs"),
        "stderr: {}",
        stderr_of(&out)
    );
}

fn fake_tree(base: &Path, domains: &[&str]) {
    for name in domains {
        let dir = base.join(name);
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("min_freq_khz"), "800000\n").unwrap();
        fs::write(dir.join("max_freq_khz"), "2200000\n").unwrap();
        fs::write(dir.join("initial_min_freq_khz"), "800000\n").unwrap();
        fs::write(dir.join("initial_max_freq_khz"), "2200000\n").unwrap();
    }
}

#[test]
fn hw_run_requires_the_confirmation_flag() {
    let out = ufs()
        .args(["hw", "run", "--counter", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("--hw"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn hw_run_pins_fake_domains_from_a_counter() {
    let tmp = tempfile::tempdir().unwrap();
    fake_tree(tmp.path(), &["package_00_die_00", "package_01_die_00"]);
    let counter = tmp.path().join("bytes_total");
    fs::write(&counter, "12345\n").unwrap();

    let out = ufs()
        .env(SYSFS_BASE_ENV, tmp.path())
        .args(["hw", "run", "--hw", "--counter"])
        .arg(&counter)
        .args(["--rounds", "3", "--period-s", "0.01"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let stdout = stdout_of(&out);
    assert!(stdout.starts_with("t,freq_ghz,cause\n"), "stdout: {stdout}");
    assert_eq!(
        stdout.lines().count(),
        4,
        "arming round emits no row:\n{stdout}"
    );
    assert!(
        stdout.contains(",0.8,hold"),
        "static counter should hold the floor:\n{stdout}"
    );
    assert!(stderr_of(&out).contains("controlling 2 domain(s)"));

    for name in ["package_00_die_00", "package_01_die_00"] {
        let dir = tmp.path().join(name);
        assert_eq!(
            fs::read_to_string(dir.join("min_freq_khz")).unwrap(),
            "800000\n"
        );
        assert_eq!(
            fs::read_to_string(dir.join("max_freq_khz")).unwrap(),
            "800000\n"
        );
    }
}

#[test]
fn hw_run_without_domains_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let counter = tmp.path().join("bytes_total");
    fs::write(&counter, "0\n").unwrap();

    let out = ufs()
        .env(SYSFS_BASE_ENV, tmp.path().join("missing"))
        .args(["hw", "run", "--hw", "--counter"])
        .arg(&counter)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
}
