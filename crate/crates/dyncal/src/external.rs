//! Simulators run as external executables.
//!
//! Each call writes `input.csv` (header `x1,...,xd`, one row in native units)
//! into an exchange directory, runs the configured command with that
//! directory as its working directory, and reads back `output.csv` (header
//! `t,value`, exactly `L` rows). The command must exit with status 0.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dyncal_core::simulators::{equidistant_grid, SimulatorSpec};
use dyncal_core::{Simulator, SimulatorError, SimulatorErrorKind};
use serde::{Deserialize, Serialize};

use crate::io::{self, IoError};

/// Overrides the configured exchange directory.
pub const EXCHANGE_DIR_ENV: &str = "DYNCAL_EXCHANGE_DIR";

pub const INPUT_FILE: &str = "input.csv";
pub const OUTPUT_FILE: &str = "output.csv";

/// Relative tolerance when checking the returned time column against the grid.
const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Equidistant { lo: f64, hi: f64, len: usize },
    Explicit(Vec<f64>),
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TimeGrid::Equidistant { lo, hi, len } => equidistant_grid(*lo, *hi, *len),
            TimeGrid::Explicit(v) => v.clone(),
        }
    }
}

fn default_name() -> String {
    "external".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub native_bounds: Vec<(f64, f64)>,
    pub time_grid: TimeGrid,
    /// A fresh temporary directory is used when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange_dir: Option<PathBuf>,
    /// Wall-clock limit per call, in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<f64>,
    /// The executable tolerates concurrent calls, each in its own subdirectory.
    #[serde(default)]
    pub reentrant: bool,
}

enum Exchange {
    Owned(tempfile::TempDir),
    Path(PathBuf),
}

impl Exchange {
    fn path(&self) -> &Path {
        match self {
            Exchange::Owned(t) => t.path(),
            Exchange::Path(p) => p,
        }
    }
}

pub struct ExternalSimulator {
    config: ExternalConfig,
    spec: SimulatorSpec,
    exchange: Exchange,
    lock: Mutex<()>,
    next_call: AtomicUsize,
}

fn err(kind: SimulatorErrorKind, message: impl Into<String>) -> SimulatorError {
    SimulatorError::new(kind, message)
}

fn io_err(e: IoError) -> SimulatorError {
    let kind = match e {
        IoError::Parse { .. } => SimulatorErrorKind::Protocol,
        IoError::File { .. } => SimulatorErrorKind::Process,
    };
    err(kind, e.to_string())
}

impl ExternalSimulator {
    /// The exchange directory comes from `DYNCAL_EXCHANGE_DIR` if set, then
    /// from the config, else a temporary directory owned by the simulator.
    pub fn new(config: ExternalConfig) -> Result<Self, SimulatorError> {
        let from_env = std::env::var_os(EXCHANGE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        Self::with_exchange_dir(config.clone(), from_env.or(config.exchange_dir))
    }

    pub fn with_exchange_dir(config: ExternalConfig, dir: Option<PathBuf>) -> Result<Self, SimulatorError> {
        if config.command.is_empty() {
            return Err(err(SimulatorErrorKind::Input, "external simulator needs a command"));
        }
        if matches!(config.timeout_secs, Some(t) if !(t > 0.0)) {
            return Err(err(SimulatorErrorKind::Input, "timeout_secs must be positive"));
        }
        let spec = SimulatorSpec::new(config.name.clone(), config.time_grid.values(), config.native_bounds.clone())?;
        let exchange = match dir {
            Some(p) => {
                fs::create_dir_all(&p).map_err(|e| err(SimulatorErrorKind::Process, format!("{}: {e}", p.display())))?;
                Exchange::Path(p)
            }
            None => Exchange::Owned(
                tempfile::Builder::new()
                    .prefix("dyncal-exchange-")
                    .tempdir()
                    .map_err(|e| err(SimulatorErrorKind::Process, e.to_string()))?,
            ),
        };
        Ok(Self { config, spec, exchange, lock: Mutex::new(()), next_call: AtomicUsize::new(0) })
    }

    pub fn spec(&self) -> &SimulatorSpec {
        &self.spec
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.config
    }

    pub fn exchange_dir(&self) -> &Path {
        self.exchange.path()
    }

    fn run_in(&self, dir: &Path, native: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        let input = dir.join(INPUT_FILE);
        let output = dir.join(OUTPUT_FILE);
        let stderr_path = dir.join("stderr.log");
        match fs::remove_file(&output) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => {
                return Err(err(SimulatorErrorKind::Process, format!("{}: {e}", output.display())))
            }
            _ => {}
        }
        io::write_inputs(&input, native.len(), &[native.to_vec()]).map_err(io_err)?;
        let stderr = fs::File::create(&stderr_path).map_err(|e| err(SimulatorErrorKind::Process, e.to_string()))?;

        let mut child = Command::new(&self.config.command[0])
            .args(&self.config.command[1..])
            .current_dir(dir)
            .env(EXCHANGE_DIR_ENV, dir)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(stderr)
            .spawn()
            .map_err(|e| err(SimulatorErrorKind::Process, format!("cannot start `{}`: {e}", self.config.command[0])))?;

        let status = match self.config.timeout_secs {
            None => child.wait(),
            Some(limit) => {
                let deadline = Instant::now() + Duration::from_secs_f64(limit);
                let mut pause = Duration::from_millis(1);
                loop {
                    match child.try_wait() {
                        Ok(Some(s)) => break Ok(s),
                        Ok(None) if Instant::now() >= deadline => {
                            let _ = child.kill();
                            let _ = child.wait();
                            return Err(err(SimulatorErrorKind::Timeout, format!("no answer within {limit} s")));
                        }
                        Ok(None) => {
                            std::thread::sleep(pause);
                            pause = (pause * 2).min(Duration::from_millis(50));
                        }
                        Err(e) => break Err(e),
                    }
                }
            }
        }
        .map_err(|e| err(SimulatorErrorKind::Process, e.to_string()))?;

        if !status.success() {
            let tail = fs::read_to_string(&stderr_path).unwrap_or_default();
            let tail = tail.trim();
            let tail: String = tail.chars().rev().take(400).collect::<Vec<_>>().into_iter().rev().collect();
            return Err(err(SimulatorErrorKind::Process, format!("simulator exited with {status}: {tail}")));
        }
        if !output.exists() {
            return Err(err(SimulatorErrorKind::Protocol, format!("simulator wrote no {OUTPUT_FILE}")));
        }
        let (t, values) = io::read_series_columns(&output).map_err(io_err)?;
        let grid = &self.spec.time_grid;
        if values.len() != grid.len() {
            return Err(err(
                SimulatorErrorKind::Protocol,
                format!("{OUTPUT_FILE} has {} rows, expected {}", values.len(), grid.len()),
            ));
        }
        if let Some(i) = t.iter().zip(grid).position(|(a, b)| (a - b).abs() > TIME_TOL * (1.0 + b.abs())) {
            return Err(err(
                SimulatorErrorKind::Protocol,
                format!("{OUTPUT_FILE} row {}: time {} does not match grid value {}", i + 1, t[i], grid[i]),
            ));
        }
        Ok(values)
    }
}

impl Simulator for ExternalSimulator {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn times(&self) -> &[f64] {
        &self.spec.time_grid
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        self.spec.check_scaled(x)?;
        let native = self.spec.unscale(x);
        if self.config.reentrant {
            let call = self.next_call.fetch_add(1, Ordering::Relaxed);
            let dir = self.exchange_dir().join(format!("call-{call}"));
            fs::create_dir_all(&dir).map_err(|e| err(SimulatorErrorKind::Process, e.to_string()))?;
            let out = self.run_in(&dir, &native);
            let _ = fs::remove_dir_all(&dir);
            out
        } else {
            let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
            self.run_in(self.exchange_dir(), &native)
        }
    }
}

/// Answers one protocol request with a bundled simulator: reads
/// `input.csv` from `dir` (native units) and writes `output.csv` there.
pub fn answer_with_builtin(sim: &dyncal_core::BuiltinSimulator, dir: &Path) -> Result<(), String> {
    let (d, rows) = io::read_inputs(&dir.join(INPUT_FILE)).map_err(|e| e.to_string())?;
    let x = match rows.as_slice() {
        [x] if d == sim.spec().dim() => x,
        _ => return Err(format!("{INPUT_FILE} must hold one row of {} values", sim.spec().dim())),
    };
    let y = sim.evaluate_native(x);
    io::write_series(&dir.join(OUTPUT_FILE), &sim.spec().time_grid, &y).map_err(|e| e.to_string())
}
