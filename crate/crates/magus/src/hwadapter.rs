//! Linux sysfs actuation for the intel_uncore_frequency interface.
//!
//! A domain is a `package_*_die_*` directory exposing `min_freq_khz` and
//! `max_freq_khz`. Pinning a frequency writes the same kilohertz value to
//! both files, ordered so the invariant `min <= max` never breaks mid-update,
//! and reads both back to detect the kernel clamping the request. Counters
//! (for example DRAM byte counters) are read through [`ThroughputReader`],
//! which differences successive readings into a bytes/s sample.
//!
//! Everything takes an explicit base directory, so tests point the adapter
//! at a fake sysfs tree. [`sysfs_base`] honors the `UFS_SYSFS_BASE`
//! environment variable for the same purpose.

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::governor::{FrequencyCommand, Governor, GovernorError};
use crate::telemetry::{TelemetryError, ThroughputSample};

pub const DEFAULT_SYSFS_BASE: &str = "/sys/devices/system/cpu/intel_uncore_frequency";
pub const SYSFS_BASE_ENV: &str = "UFS_SYSFS_BASE";

#[derive(Debug, Error)]
pub enum HwError {
    #[error("cannot enumerate uncore domains under {base}: {source}")]
    Discover { base: PathBuf, source: io::Error },
    #[error(
        "no uncore frequency domains under {base}; is the intel_uncore_frequency driver loaded?"
    )]
    NoDomains { base: PathBuf },
    #[error("permission denied writing {path}; uncore control needs root (or write access to the sysfs files)")]
    PermissionDenied { path: PathBuf },
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot parse {path:?} content {text:?} as an integer")]
    Parse { path: PathBuf, text: String },
    #[error("requested {requested_khz} kHz outside the hardware range [{min_khz}, {max_khz}] kHz")]
    OutOfRange {
        requested_khz: u64,
        min_khz: u64,
        max_khz: u64,
    },
    #[error("hardware rejected the setpoint: {path} reads {actual_khz} kHz after writing {expected_khz} kHz")]
    HardwareReject {
        path: PathBuf,
        expected_khz: u64,
        actual_khz: u64,
    },
    #[error("frequency {freq} Hz is not actuatable")]
    InvalidFrequency { freq: f64 },
    #[error(
        "counter at {path} went backwards ({previous} -> {current}); re-armed on the new value"
    )]
    CounterReset {
        path: PathBuf,
        previous: u64,
        current: u64,
    },
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Governor(#[from] GovernorError),
}

fn read_io(path: &Path) -> Result<String, HwError> {
    fs::read_to_string(path).map_err(|source| map_io(path, source))
}

fn map_io(path: &Path, source: io::Error) -> HwError {
    if source.kind() == io::ErrorKind::PermissionDenied {
        HwError::PermissionDenied {
            path: path.to_path_buf(),
        }
    } else {
        HwError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn read_u64(path: &Path) -> Result<u64, HwError> {
    let text = read_io(path)?;
    text.trim().parse().map_err(|_| HwError::Parse {
        path: path.to_path_buf(),
        text: text.trim().to_string(),
    })
}

/// The sysfs root: `UFS_SYSFS_BASE` if set, the kernel default otherwise.
pub fn sysfs_base() -> PathBuf {
    sysfs_base_from(std::env::var_os(SYSFS_BASE_ENV))
}

pub fn sysfs_base_from(env_value: Option<OsString>) -> PathBuf {
    env_value
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_SYSFS_BASE))
}

/// Converts hertz to the kilohertz integer the sysfs files expect.
pub fn khz_for_hz(freq_hz: f64) -> Result<u64, HwError> {
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(HwError::InvalidFrequency { freq: freq_hz });
    }
    Ok((freq_hz / 1000.0).round() as u64)
}

/// One `package_*_die_*` control directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncoreDomain {
    dir: PathBuf,
}

impl UncoreDomain {
    /// Opens a domain directory, requiring both control files to exist.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, HwError> {
        let domain = UncoreDomain { dir: dir.into() };
        for path in [domain.min_path(), domain.max_path()] {
            if !path.is_file() {
                return Err(HwError::Io {
                    path,
                    source: io::Error::new(io::ErrorKind::NotFound, "control file missing"),
                });
            }
        }
        Ok(domain)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn min_path(&self) -> PathBuf {
        self.dir.join("min_freq_khz")
    }

    fn max_path(&self) -> PathBuf {
        self.dir.join("max_freq_khz")
    }

    /// The range the hardware advertises through the read-only
    /// `initial_*_freq_khz` files, when present.
    pub fn hardware_range_khz(&self) -> Result<Option<(u64, u64)>, HwError> {
        let lo = self.dir.join("initial_min_freq_khz");
        let hi = self.dir.join("initial_max_freq_khz");
        if lo.is_file() && hi.is_file() {
            Ok(Some((read_u64(&lo)?, read_u64(&hi)?)))
        } else {
            Ok(None)
        }
    }

    /// Current `(min, max)` setting in kHz.
    pub fn read_khz(&self) -> Result<(u64, u64), HwError> {
        Ok((read_u64(&self.min_path())?, read_u64(&self.max_path())?))
    }

    /// Pins both limits to `freq_hz`, refusing targets outside the advertised
    /// hardware range before touching anything, and verifying the kernel
    /// accepted the value by reading both files back.
    pub fn apply_hz(&self, freq_hz: f64) -> Result<(), HwError> {
        let khz = khz_for_hz(freq_hz)?;
        if let Some((min_khz, max_khz)) = self.hardware_range_khz()? {
            if khz < min_khz || khz > max_khz {
                return Err(HwError::OutOfRange {
                    requested_khz: khz,
                    min_khz,
                    max_khz,
                });
            }
        }
        let (current_min, _) = self.read_khz()?;
        // Keep min <= max at every intermediate state: raise max before min
        // when moving up, lower min before max when moving down.
        let order = if khz >= current_min {
            [self.max_path(), self.min_path()]
        } else {
            [self.min_path(), self.max_path()]
        };
        for path in &order {
            fs::write(path, format!("{khz}\n")).map_err(|source| map_io(path, source))?;
        }
        self.verify_pinned(khz)
    }

    /// Probes both control files for write access without changing them.
    pub fn check_writable(&self) -> Result<(), HwError> {
        for path in [self.min_path(), self.max_path()] {
            fs::OpenOptions::new()
                .write(true)
                .open(&path)
                .map_err(|source| map_io(&path, source))?;
        }
        Ok(())
    }

    fn verify_pinned(&self, khz: u64) -> Result<(), HwError> {
        for path in [self.min_path(), self.max_path()] {
            let actual = read_u64(&path)?;
            if actual != khz {
                return Err(HwError::HardwareReject {
                    path,
                    expected_khz: khz,
                    actual_khz: actual,
                });
            }
        }
        Ok(())
    }
}

/// All domains under `base`, sorted by directory name.
pub fn discover_domains(base: &Path) -> Result<Vec<UncoreDomain>, HwError> {
    let entries = fs::read_dir(base).map_err(|source| HwError::Discover {
        base: base.to_path_buf(),
        source,
    })?;
    let mut domains = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| HwError::Discover {
            base: base.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if !(name.starts_with("package_") && name.contains("_die_")) {
            continue;
        }
        if let Ok(domain) = UncoreDomain::open(entry.path()) {
            domains.push(domain);
        }
    }
    domains.sort_by(|a, b| a.dir.cmp(&b.dir));
    if domains.is_empty() {
        return Err(HwError::NoDomains {
            base: base.to_path_buf(),
        });
    }
    Ok(domains)
}

/// A monotonically increasing byte counter exposed as a file.
#[derive(Debug, Clone)]
pub struct CounterFile {
    path: PathBuf,
}

impl CounterFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        CounterFile { path: path.into() }
    }

    pub fn read(&self) -> Result<u64, HwError> {
        read_u64(&self.path)
    }
}

/// Differences a byte counter into throughput samples.
///
/// The first call arms the baseline and yields `Ok(None)`. A counter that
/// goes backwards (reset, wraparound) re-arms on the new value and reports
/// [`HwError::CounterReset`] so the caller can skip the round.
#[derive(Debug)]
pub struct ThroughputReader {
    counter: CounterFile,
    last: Option<(f64, u64)>,
}

impl ThroughputReader {
    pub fn new(counter: CounterFile) -> Self {
        ThroughputReader {
            counter,
            last: None,
        }
    }

    pub fn sample(&mut self, now: f64) -> Result<Option<ThroughputSample>, HwError> {
        let value = self.counter.read()?;
        let Some((prev_t, prev_v)) = self.last else {
            self.last = Some((now, value));
            return Ok(None);
        };
        if value < prev_v {
            self.last = Some((now, value));
            return Err(HwError::CounterReset {
                path: self.counter.path.clone(),
                previous: prev_v,
                current: value,
            });
        }
        if now <= prev_t {
            return Err(TelemetryError::NonMonotonicTimestamp {
                prev: prev_t,
                next: now,
            }
            .into());
        }
        let throughput = (value - prev_v) as f64 / (now - prev_t);
        self.last = Some((now, value));
        Ok(Some(ThroughputSample::new(now, throughput)?))
    }
}

/// Couples a governor to real hardware: each round is exactly one counter
/// read, one decision, and one actuation across every domain.
pub struct ControlLoop<'a> {
    governor: &'a mut dyn Governor,
    reader: ThroughputReader,
    domains: Vec<UncoreDomain>,
    last_command: Option<FrequencyCommand>,
}

impl<'a> ControlLoop<'a> {
    pub fn new(
        governor: &'a mut dyn Governor,
        reader: ThroughputReader,
        domains: Vec<UncoreDomain>,
    ) -> Self {
        ControlLoop {
            governor,
            reader,
            domains,
            last_command: None,
        }
    }

    pub fn last_command(&self) -> Option<FrequencyCommand> {
        self.last_command
    }

    /// Runs one control round at time `now` (seconds, any monotonic origin).
    /// Returns the applied command, or `None` while the counter baseline is
    /// still arming.
    pub fn run_round(&mut self, now: f64) -> Result<Option<FrequencyCommand>, HwError> {
        let Some(sample) = self.reader.sample(now)? else {
            return Ok(None);
        };
        let obs = crate::governor::Observation::throughput_only(sample);
        let command = self.governor.decide(&obs)?;
        for domain in &self.domains {
            domain.apply_hz(command.target)?;
        }
        self.last_command = Some(command);
        Ok(Some(command))
    }
}
