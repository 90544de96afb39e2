//! Dynamic simulators: the closed-form test functions and the trait the
//! calibration loop drives.
//!
//! Calibration always works in the scaled unit hypercube; each simulator
//! carries the native box its inputs are unscaled into.

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{cos, exp, sqrt};

const PI: f64 = core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatorErrorKind {
    /// The simulator process failed (spawn error or nonzero exit).
    Process,
    /// The simulator answered with malformed or wrongly sized output.
    Protocol,
    Timeout,
    /// Bad input (wrong dimension, outside the unit box).
    Input,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct SimulatorError {
    pub kind: SimulatorErrorKind,
    pub message: String,
}

impl SimulatorError {
    pub fn new(kind: SimulatorErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

/// A deterministic simulator producing one series per input.
pub trait Simulator {
    fn name(&self) -> &str;

    /// Input dimension.
    fn dim(&self) -> usize;

    /// Physical time grid, one entry per output value.
    fn times(&self) -> &[f64];

    /// Evaluates the full series at a point of the scaled box `[0,1]^d`.
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError>;

    fn series_len(&self) -> usize {
        self.times().len()
    }
}

impl<S: Simulator + ?Sized> Simulator for &S {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn times(&self) -> &[f64] {
        (**self).times()
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        (**self).evaluate(x)
    }
}

/// Counts successful and failed evaluations of the wrapped simulator.
pub struct CountingSimulator<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S: Simulator> CountingSimulator<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: Simulator> Simulator for CountingSimulator<S> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn times(&self) -> &[f64] {
        self.inner.times()
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(x)
    }
}

/// Static description of a simulator's inputs and time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorSpec {
    pub name: String,
    pub time_grid: Vec<f64>,
    pub native_bounds: Vec<(f64, f64)>,
}

impl SimulatorSpec {
    pub fn new(name: impl Into<String>, time_grid: Vec<f64>, native_bounds: Vec<(f64, f64)>) -> Result<Self, SimulatorError> {
        if time_grid.windows(2).any(|w| !(w[1] > w[0])) || time_grid.is_empty() {
            return Err(SimulatorError::new(SimulatorErrorKind::Input, "time grid must be nonempty and strictly increasing"));
        }
        if native_bounds.is_empty() || native_bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(SimulatorError::new(SimulatorErrorKind::Input, "each native bound needs lo < hi"));
        }
        Ok(Self { name: name.into(), time_grid, native_bounds })
    }

    pub fn dim(&self) -> usize {
        self.native_bounds.len()
    }

    /// Maps a scaled point to native units: `lo + u (hi - lo)`.
    pub fn unscale(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.native_bounds).map(|(u, (lo, hi))| lo + u * (hi - lo)).collect()
    }

    pub fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.native_bounds).map(|(x, (lo, hi))| (x - lo) / (hi - lo)).collect()
    }

    pub fn check_scaled(&self, u: &[f64]) -> Result<(), SimulatorError> {
        if u.len() != self.dim() {
            return Err(SimulatorError::new(
                SimulatorErrorKind::Input,
                alloc::format!("{} expects {} inputs, got {}", self.name, self.dim(), u.len()),
            ));
        }
        if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(SimulatorError::new(SimulatorErrorKind::Input, "scaled input outside [0,1]"));
        }
        Ok(())
    }
}

/// `L` equidistant points from `lo` to `hi`, both included.
pub fn equidistant_grid(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let step = (hi - lo) / (len - 1) as f64;
            let mut g: Vec<f64> = (0..len).map(|i| lo + step * i as f64).collect();
            g[len - 1] = hi;
            g
        }
    }
}

/// `cos(x1) cos(x2) exp(-(x1 - pi t)^2 - (x2 - pi)^2)` on the unit square.
pub fn easom(x: &[f64], t: f64) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    cos(x1) * cos(x2) * exp(-(x1 - PI * t) * (x1 - PI * t) - (x2 - PI) * (x2 - PI))
}

/// `exp(3 x1 t + t) cos(6 x2 t + 2 t - 8 x3 - 6)`
pub fn harari_steinberg(x: &[f64], t: f64) -> f64 {
    exp(3.0 * x[0] * t + t) * cos(6.0 * x[1] * t + 2.0 * t - 8.0 * x[2] - 6.0)
}

/// Pollutant concentration from two spills, native inputs
/// `(mass, diffusion, location, release time, position)`:
///
/// `x1 / sqrt(x2 t) exp(-x5^2 / (4 x2 t))
///  + 1{x4 < t} x1 / sqrt(x2 (t - x4)) exp(-(x5 - x3)^2 / (4 x2 (t - x4)))`
pub fn bliznyuk(x: &[f64], t: f64) -> f64 {
    let (m, dif, loc, tau, pos) = (x[0], x[1], x[2], x[3], x[4]);
    let first = m / sqrt(dif * t) * exp(-pos * pos / (4.0 * dif * t));
    if tau < t {
        let dt = t - tau;
        first + m / sqrt(dif * dt) * exp(-(pos - loc) * (pos - loc) / (4.0 * dif * dt))
    } else {
        first
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    Easom,
    HarariSteinberg,
    Bliznyuk,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 3] = [BuiltinKind::Easom, BuiltinKind::HarariSteinberg, BuiltinKind::Bliznyuk];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::Easom => "easom",
            BuiltinKind::HarariSteinberg => "harari_steinberg",
            BuiltinKind::Bliznyuk => "bliznyuk",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// One of the bundled closed-form simulators on its 200-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinSimulator {
    kind: BuiltinKind,
    spec: SimulatorSpec,
}

impl BuiltinSimulator {
    pub fn new(kind: BuiltinKind) -> Self {
        let (grid, bounds): (Vec<f64>, Vec<(f64, f64)>) = match kind {
            BuiltinKind::Easom => (equidistant_grid(0.0, 1.0, 200), alloc::vec![(0.0, 1.0); 2]),
            BuiltinKind::HarariSteinberg => (equidistant_grid(0.0, 1.0, 200), alloc::vec![(0.0, 1.0); 3]),
            BuiltinKind::Bliznyuk => (
                equidistant_grid(35.3, 95.0, 200),
                alloc::vec![(7.0, 13.0), (0.02, 0.12), (0.01, 3.0), (30.01, 30.304), (0.0, 3.0)],
            ),
        };
        let spec = SimulatorSpec::new(kind.name(), grid, bounds).expect("builtin spec is valid");
        Self { kind, spec }
    }

    pub fn easom() -> Self {
        Self::new(BuiltinKind::Easom)
    }

    pub fn harari_steinberg() -> Self {
        Self::new(BuiltinKind::HarariSteinberg)
    }

    pub fn bliznyuk() -> Self {
        Self::new(BuiltinKind::Bliznyuk)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        BuiltinKind::from_name(name).map(Self::new)
    }

    pub fn kind(&self) -> BuiltinKind {
        self.kind
    }

    pub fn spec(&self) -> &SimulatorSpec {
        &self.spec
    }

    /// Native-unit input whose series serves as the reference calibration target.
    pub fn reference_input(&self) -> Vec<f64> {
        match self.kind {
            BuiltinKind::Easom => alloc::vec![0.8, 0.2],
            BuiltinKind::HarariSteinberg => alloc::vec![0.522, 0.950, 0.427],
            BuiltinKind::Bliznyuk => alloc::vec![9.640, 0.059, 1.445, 30.277, 2.520],
        }
    }

    /// Series at a native-unit input.
    pub fn evaluate_native(&self, x: &[f64]) -> Vec<f64> {
        let f = match self.kind {
            BuiltinKind::Easom => easom,
            BuiltinKind::HarariSteinberg => harari_steinberg,
            BuiltinKind::Bliznyuk => bliznyuk,
        };
        self.spec.time_grid.iter().map(|&t| f(x, t)).collect()
    }

    /// The reference target series.
    pub fn reference_series(&self) -> Vec<f64> {
        self.evaluate_native(&self.reference_input())
    }
}

impl Simulator for BuiltinSimulator {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn times(&self) -> &[f64] {
        &self.spec.time_grid
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        self.spec.check_scaled(x)?;
        Ok(self.evaluate_native(&self.spec.unscale(x)))
    }
}

impl core::fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}
