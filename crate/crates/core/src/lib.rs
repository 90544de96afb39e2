//! Inverse problems for time-series valued computer simulators.
//!
//! A target series is reduced to a handful of time indices (the
//! discretization-point-set, or DPS) by greedy cubic-spline knot selection.
//! Each DPS index then defines a scalar contour problem that is solved by
//! sequential design: an ordinary-kriging surrogate is fitted to the scalar
//! responses and the next simulator run is placed where the contour
//! expected-improvement criterion is largest. The inverse solution is
//! extracted from the intersection of the scalar solution sets. A multi-stage
//! history-matching baseline is provided for comparison.
//!
//! The crate is `no_std` (with `alloc`). Enable the `parallel` feature to
//! evaluate candidate sets and likelihood multistarts on a rayon pool; results
//! are identical either way.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod acquisition;
pub mod calibrate;
pub mod designs;
pub mod gp;
mod linalg;
mod math;
pub mod metrics;
mod par;
pub mod rng;
pub mod simulators;
pub mod spline_dps;

pub use acquisition::ContourTarget;
pub use calibrate::{
    extract_solution, hm_run, msce_run, solve_scalar_contour, CalibrationError,
    CalibrationResult, HmConfig, MsceConfig,
};
pub use designs::{maximin_lhd, maxpro_lhd, random_lhd, DesignError, DesignMatrix};
pub use gp::{fit_gp, FitConfig, GpError, GpModel, Prediction};
pub use metrics::{MetricsError, SeriesMetrics};
pub use simulators::{BuiltinSimulator, Simulator, SimulatorError, SimulatorErrorKind};
pub use spline_dps::{build_dps, DpsResult, ElbowRule, TargetSeries};
