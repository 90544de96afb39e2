//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dyncal_core::spline_dps::build_dps_with;
use dyncal_core::{hm_run, msce_run, DpsResult, ElbowRule, SeriesMetrics, Simulator};

use crate::artifacts::{self, mse_path_csv};
use crate::config::{self, AnySimulator, CalibrateConfig, HmRunConfig, SimulatorChoice};
use crate::error::CliError;
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "dyncal", version, about = "Calibrate time-series simulators by multiple scalar contour estimation")]
pub struct Cli {
    /// Worker threads for candidate scoring and likelihood multistarts
    /// (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ElbowArg {
    Chord,
    SecondDifference,
}

impl From<ElbowArg> for ElbowRule {
    fn from(a: ElbowArg) -> Self {
        match a {
            ElbowArg::Chord => ElbowRule::Chord,
            ElbowArg::SecondDifference => ElbowRule::SecondDifference,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select the DPS of a target series (`t,value` CSV).
    Dps {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long, value_enum, default_value_t = ElbowArg::Chord)]
        elbow: ElbowArg,
        #[arg(long, default_value = "dyncal-out")]
        out_dir: PathBuf,
    },
    /// Run multiple scalar contour estimation from a JSON config.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "dyncal-out")]
        out_dir: PathBuf,
    },
    /// Run the history-matching baseline from a JSON config.
    Hm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "dyncal-out")]
        out_dir: PathBuf,
    },
    /// Evaluate a simulator at every row of an `x1,...,xd` CSV.
    Simulate {
        /// Bundled simulator name, or a JSON file describing an external one.
        #[arg(long)]
        simulator: String,
        #[arg(long)]
        inputs: PathBuf,
        /// Inputs are in the unit box rather than native units.
        #[arg(long)]
        scaled: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// Goodness-of-fit metrics of a solution series against a target.
    Evaluate {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Writes to stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub fn dps(target: &Path, k_max: usize, elbow: ElbowRule, out_dir: &Path) -> Result<DpsResult, CliError> {
    let series = io::read_series(target)?;
    let result = build_dps_with(&series, k_max, elbow)?;
    io::create_dir(out_dir)?;
    io::write_json(&out_dir.join("dps.json"), &result)?;
    io::write_text(&out_dir.join(artifacts::MSE_PATH_FILE), &mse_path_csv(&result))?;
    Ok(result)
}

pub fn calibrate(config_path: &Path, seed: Option<u64>, out_dir: &Path) -> Result<dyncal_core::CalibrationResult, CliError> {
    let mut cfg: CalibrateConfig = config::load(config_path)?;
    if let Some(s) = seed {
        cfg.msce.seed = s;
    }
    cfg.msce.validate()?;
    let sim = AnySimulator::from_choice(&cfg.simulator)?;
    let target = config::resolve_target(&mut cfg.target, &sim, &config::base_dir(config_path))?;
    let result = msce_run(&sim, &target, &cfg.msce)?;
    artifacts::write_run(out_dir, &cfg, &result, &target, sim.spec())?;
    Ok(result)
}

pub fn hm(config_path: &Path, seed: Option<u64>, out_dir: &Path) -> Result<dyncal_core::CalibrationResult, CliError> {
    let mut cfg: HmRunConfig = config::load(config_path)?;
    if let Some(s) = seed {
        cfg.hm.seed = s;
    }
    cfg.hm.validate()?;
    let sim = AnySimulator::from_choice(&cfg.simulator)?;
    let target = config::resolve_target(&mut cfg.target, &sim, &config::base_dir(config_path))?;
    let dps = match &cfg.dps_override {
        Some(d) => DpsResult::fixed(d.clone()),
        None => build_dps_with(&target, cfg.k_max, cfg.elbow)?,
    };
    let result = hm_run(&sim, &target, &dps, &cfg.hm)?;
    artifacts::write_run(out_dir, &cfg, &result, &target, sim.spec())?;
    Ok(result)
}

fn simulator_from_arg(arg: &str) -> Result<AnySimulator, CliError> {
    let path = Path::new(arg);
    let choice = if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = io::read_text(path)?;
        serde_json::from_str::<SimulatorChoice>(&text).map_err(|e| CliError::Config(format!("{arg}: {e}")))?
    } else {
        SimulatorChoice::Builtin(arg.to_owned())
    };
    AnySimulator::from_choice(&choice)
}

pub fn simulate(simulator: &str, inputs: &Path, scaled: bool, output: &Path) -> Result<usize, CliError> {
    let sim = simulator_from_arg(simulator)?;
    let (d, rows) = io::read_inputs(inputs)?;
    if !rows.is_empty() && d != sim.dim() {
        return Err(CliError::Config(format!("{} has {d} columns, {} takes {}", inputs.display(), sim.name(), sim.dim())));
    }
    let mut series = Vec::with_capacity(rows.len());
    for r in &rows {
        let u = if scaled { r.clone() } else { sim.spec().scale(r) };
        series.push(sim.evaluate(&u)?);
    }
    io::write_responses(output, sim.times(), &series)?;
    Ok(rows.len())
}

pub fn evaluate(solution: &Path, target: &Path) -> Result<SeriesMetrics, CliError> {
    let (_, g) = io::read_series_columns(solution)?;
    let (_, g0) = io::read_series_columns(target)?;
    Ok(SeriesMetrics::compute(&g, &g0)?)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Dps { target, k_max, elbow, out_dir } => {
            let r = dps(&target, k_max, elbow.into(), &out_dir)?;
            println!("dps {:?} (k = {})", r.dps, r.k_selected);
        }
        Command::Calibrate { config, seed, out_dir } => {
            let r = calibrate(&config, seed, &out_dir)?;
            report(&r, &out_dir);
        }
        Command::Hm { config, seed, out_dir } => {
            let r = hm(&config, seed, &out_dir)?;
            report(&r, &out_dir);
        }
        Command::Simulate { simulator, inputs, scaled, output } => {
            let n = simulate(&simulator, &inputs, scaled, &output)?;
            eprintln!("{n} runs written to {}", output.display());
        }
        Command::Evaluate { solution, target, output } => {
            let m = evaluate(&solution, &target)?;
            match output {
                Some(p) => io::write_json(&p, &m)?,
                None => println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize")),
            }
        }
    }
    Ok(())
}

fn report(r: &dyncal_core::CalibrationResult, out_dir: &Path) {
    println!("x_opt {:?}", r.x_opt);
    if let Some(m) = &r.metrics {
        println!("rmse {:.4e}  nse {:.6}", m.rmse, m.nse);
    }
    println!("{} simulator runs; artifacts in {}", r.simulator_calls, out_dir.display());
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
