//! JSON run configurations.
//!
//! A config names the simulator, the target series and the method settings,
//! which sit at the top level next to `simulator` and `target`:
//!
//! ```text
//! { "simulator": "easom", "n0": 15, "budget": 50, "seed": 1 }
//! ```
//!
//! Omitted settings take their defaults. The resolved config written to a
//! run directory carries the target inline, so it replays the run on its own.

use std::path::{Path, PathBuf};

use dyncal_core::simulators::{BuiltinKind, SimulatorSpec};
use dyncal_core::{BuiltinSimulator, ElbowRule, HmConfig, MsceConfig, Simulator, SimulatorError, TargetSeries};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::external::{ExternalConfig, ExternalSimulator};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimulatorChoice {
    /// One of `easom`, `harari_steinberg`, `bliznyuk`.
    Builtin(String),
    External(ExternalConfig),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetChoice {
    /// The bundled simulator's reference series.
    #[default]
    Reference,
    /// A `t,value` file; relative paths are taken from the config's directory.
    Csv(PathBuf),
    /// The simulator's own output at this native-unit input.
    Input(Vec<f64>),
    Series { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateConfig {
    pub simulator: SimulatorChoice,
    #[serde(default)]
    pub target: TargetChoice,
    #[serde(flatten)]
    pub msce: MsceConfig,
}

fn default_k_max() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmRunConfig {
    pub simulator: SimulatorChoice,
    #[serde(default)]
    pub target: TargetChoice,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub elbow: ElbowRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dps_override: Option<Vec<usize>>,
    #[serde(flatten)]
    pub hm: HmConfig,
}

/// Either kind of simulator behind one type.
pub enum AnySimulator {
    Builtin(BuiltinSimulator),
    External(ExternalSimulator),
}

impl AnySimulator {
    pub fn from_choice(choice: &SimulatorChoice) -> Result<Self, CliError> {
        match choice {
            SimulatorChoice::Builtin(name) => BuiltinSimulator::by_name(name).map(AnySimulator::Builtin).ok_or_else(|| {
                let known: Vec<&str> = BuiltinKind::ALL.iter().map(|k| k.name()).collect();
                CliError::Config(format!("unknown simulator `{name}` (known: {})", known.join(", ")))
            }),
            SimulatorChoice::External(cfg) => Ok(AnySimulator::External(ExternalSimulator::new(cfg.clone())?)),
        }
    }

    pub fn spec(&self) -> &SimulatorSpec {
        match self {
            AnySimulator::Builtin(s) => s.spec(),
            AnySimulator::External(s) => s.spec(),
        }
    }
}

impl Simulator for AnySimulator {
    fn name(&self) -> &str {
        match self {
            AnySimulator::Builtin(s) => s.name(),
            AnySimulator::External(s) => s.name(),
        }
    }

    fn dim(&self) -> usize {
        self.spec().dim()
    }

    fn times(&self) -> &[f64] {
        &self.spec().time_grid
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        match self {
            AnySimulator::Builtin(s) => s.evaluate(x),
            AnySimulator::External(s) => s.evaluate(x),
        }
    }
}

/// Reads a config file; relative target paths are rebased onto its directory.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = io::read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Resolves the target against the simulator and rewrites `choice` to the
/// inline series it produced.
pub fn resolve_target(choice: &mut TargetChoice, sim: &AnySimulator, base: &Path) -> Result<TargetSeries, CliError> {
    let series = match &*choice {
        TargetChoice::Reference => match sim {
            AnySimulator::Builtin(b) => TargetSeries::new(b.times().to_vec(), b.reference_series())?,
            AnySimulator::External(_) => {
                return Err(CliError::Config("an external simulator needs an explicit target".into()));
            }
        },
        TargetChoice::Csv(p) => io::read_series(&base.join(p))?,
        TargetChoice::Input(native) => {
            let spec = sim.spec();
            if native.len() != spec.dim() {
                return Err(CliError::Config(format!("target input has {} values, simulator takes {}", native.len(), spec.dim())));
            }
            let u = spec.scale(native);
            TargetSeries::new(sim.times().to_vec(), sim.evaluate(&u)?)?
        }
        TargetChoice::Series { times, values } => TargetSeries::new(times.clone(), values.clone())?,
    };
    if series.len() != sim.series_len() {
        return Err(CliError::Config(format!(
            "target has {} time points, simulator produces {}",
            series.len(),
            sim.series_len()
        )));
    }
    *choice = TargetChoice::Series { times: series.times().to_vec(), values: series.values().to_vec() };
    Ok(series)
}

/// Directory that relative paths in a config are resolved against.
pub fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}
