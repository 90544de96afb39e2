//! Errors and the process exit-code taxonomy.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | file could not be read or written, or failed to parse |
//! | 2 | invalid configuration or command line (includes unknown simulator) |
//! | 3 | simulator budget too small for the DPS size |
//! | 4 | surrogate fitting failed |
//! | 5 | external simulator broke the file protocol |
//! | 6 | external simulator failed to run, exited nonzero, or timed out |
//! | 7 | numerical failure elsewhere (spline fit, metrics) |

use dyncal_core::calibrate::CalibrationError;
use dyncal_core::spline_dps::SplineError;
use dyncal_core::{MetricsError, SimulatorError, SimulatorErrorKind};
use thiserror::Error;

use crate::io::IoError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("simulator: {0}")]
    Simulator(#[from] SimulatorError),
    #[error("spline: {0}")]
    Spline(#[from] SplineError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
}

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_FIT: u8 = 4;
pub const EXIT_PROTOCOL: u8 = 5;
pub const EXIT_PROCESS: u8 = 6;
pub const EXIT_NUMERICAL: u8 = 7;

fn simulator_code(e: &SimulatorError) -> u8 {
    match e.kind {
        SimulatorErrorKind::Protocol => EXIT_PROTOCOL,
        SimulatorErrorKind::Process | SimulatorErrorKind::Timeout => EXIT_PROCESS,
        SimulatorErrorKind::Input => EXIT_CONFIG,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Calibration(e) => match e {
                CalibrationError::Config(_) | CalibrationError::Design(_) => EXIT_CONFIG,
                CalibrationError::Budget { .. } => EXIT_BUDGET,
                CalibrationError::Fit(_) => EXIT_FIT,
                CalibrationError::Simulator(s) => simulator_code(s),
                CalibrationError::Dps(_) => EXIT_NUMERICAL,
            },
            CliError::Simulator(s) => simulator_code(s),
            CliError::Spline(_) | CliError::Metrics(_) => EXIT_NUMERICAL,
        }
    }
}
