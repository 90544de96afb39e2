//! Files written to a run directory.
//!
//! - `config.json`: the resolved config, enough to replay the run
//! - `training.csv`: every simulator run in call order with its origin
//! - `responses.csv`: the `L x N` response matrix
//! - `result.json`: solution, metrics and flags
//! - `trace.csv`: the criterion value behind each sequentially chosen run
//! - `overlay.csv`, `mse_path.csv`, `metrics.csv`: plot data

use std::path::Path;

use dyncal_core::calibrate::{Extraction, HmSummary, Method, Origin};
use dyncal_core::simulators::SimulatorSpec;
use dyncal_core::{CalibrationResult, DpsResult, SeriesMetrics, TargetSeries};
use serde::Serialize;

use crate::io::{self, fmt_f64, IoError};

pub const CONFIG_FILE: &str = "config.json";
pub const TRAINING_FILE: &str = "training.csv";
pub const RESPONSES_FILE: &str = "responses.csv";
pub const RESULT_FILE: &str = "result.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const OVERLAY_FILE: &str = "overlay.csv";
pub const MSE_PATH_FILE: &str = "mse_path.csv";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Serialize)]
pub struct Flags {
    /// The elbow rule found no elbow and used `k_max` knots.
    pub elbow_fallback: bool,
    /// The extraction tolerance had to be widened.
    pub epsilon_widened: bool,
    /// No grid point satisfied every scalar problem; the minimax point was used.
    pub extraction_fallback: bool,
}

/// Contents of `result.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub method: Method,
    pub simulator: &'a str,
    pub x_opt: &'a [f64],
    pub x_opt_native: Vec<f64>,
    pub dps: &'a DpsResult,
    pub metrics: Option<SeriesMetrics>,
    pub simulator_calls: usize,
    pub extraction: Option<&'a Extraction>,
    pub hm: Option<&'a HmSummary>,
    pub flags: Flags,
}

impl<'a> RunSummary<'a> {
    pub fn new(result: &'a CalibrationResult, spec: &'a SimulatorSpec) -> Self {
        let ex = result.extraction.as_ref();
        Self {
            method: result.method,
            simulator: &spec.name,
            x_opt: &result.x_opt,
            x_opt_native: spec.unscale(&result.x_opt),
            dps: &result.dps,
            metrics: result.metrics,
            simulator_calls: result.simulator_calls,
            extraction: ex,
            hm: result.hm.as_ref(),
            flags: Flags {
                elbow_fallback: result.dps.elbow_fallback,
                epsilon_widened: ex.is_some_and(|e| e.widenings > 0),
                extraction_fallback: ex.is_some_and(|e| e.fallback),
            },
        }
    }
}

fn origin_fields(o: &Origin, dps: &[usize]) -> (&'static str, String, String) {
    match *o {
        Origin::Initial => ("initial", String::new(), String::new()),
        Origin::Contour { problem } => ("contour", (problem + 1).to_string(), dps.get(problem).map_or(String::new(), |t| t.to_string())),
        Origin::HmStage { stage } => ("hm_stage", stage.to_string(), String::new()),
    }
}

fn x_header(d: usize) -> String {
    (1..=d).map(|j| format!(",x{j}")).collect()
}

fn x_fields(x: &[f64]) -> String {
    x.iter().map(|v| format!(",{}", fmt_f64(*v))).collect()
}

fn training_csv(result: &CalibrationResult) -> String {
    let tr = &result.training;
    let mut out = format!("call,origin,group,t_index{}\n", x_header(tr.inputs.d()));
    for (i, (x, o)) in tr.inputs.rows().zip(&tr.origins).enumerate() {
        let (origin, group, t) = origin_fields(o, &result.dps.dps);
        out.push_str(&format!("{},{origin},{group},{t}{}\n", i + 1, x_fields(x)));
    }
    out
}

fn trace_csv(result: &CalibrationResult, d: usize) -> String {
    let mut out = format!("step,call,origin,group,t_index,criterion,value{}\n", x_header(d));
    for (i, e) in result.run_log.iter().enumerate() {
        let (origin, group, _) = origin_fields(&e.origin, &result.dps.dps);
        let t = e.t_index.map_or(String::new(), |t| t.to_string());
        let criterion = match e.criterion {
            dyncal_core::calibrate::Criterion::ExpectedImprovement => "expected_improvement",
            dyncal_core::calibrate::Criterion::MaxImplausibility => "max_implausibility",
        };
        out.push_str(&format!(
            "{},{},{origin},{group},{t},{criterion},{}{}\n",
            i + 1,
            e.run + 1,
            fmt_f64(e.value),
            x_fields(&e.point)
        ));
    }
    out
}

pub fn mse_path_csv(dps: &DpsResult) -> String {
    let mut out = String::from("knots,mse\n");
    for (k, m) in dps.mse_path.iter().enumerate() {
        out.push_str(&format!("{k},{}\n", fmt_f64(*m)));
    }
    out
}

fn overlay_csv(target: &TargetSeries, solution: &[f64]) -> String {
    let mut out = String::from("t,target,solution\n");
    for ((t, g0), g) in target.times().iter().zip(target.values()).zip(solution) {
        out.push_str(&format!("{},{},{}\n", fmt_f64(*t), fmt_f64(*g0), fmt_f64(*g)));
    }
    out
}

fn metrics_csv(m: &SeriesMetrics) -> String {
    let opt = |v: Option<f64>| v.map_or(String::from("NA"), fmt_f64);
    format!(
        "metric,value\nrmse,{}\nr2,{}\nnormd_ratio,{}\nnormd_log,{}\nnse,{}\n",
        fmt_f64(m.rmse),
        opt(m.r2),
        fmt_f64(m.normd_ratio),
        opt(m.normd_log),
        fmt_f64(m.nse)
    )
}

/// Writes every artifact of a finished run into `dir`.
pub fn write_run<C: Serialize>(
    dir: &Path,
    config: &C,
    result: &CalibrationResult,
    target: &TargetSeries,
    spec: &SimulatorSpec,
) -> Result<(), IoError> {
    io::create_dir(dir)?;
    io::write_json(&dir.join(CONFIG_FILE), config)?;
    io::write_text(&dir.join(TRAINING_FILE), &training_csv(result))?;
    io::write_responses(&dir.join(RESPONSES_FILE), &spec.time_grid, &result.training.responses)?;
    io::write_json(&dir.join(RESULT_FILE), &RunSummary::new(result, spec))?;
    io::write_text(&dir.join(TRACE_FILE), &trace_csv(result, spec.dim()))?;
    io::write_text(&dir.join(OVERLAY_FILE), &overlay_csv(target, &result.solution_series))?;
    if !result.dps.mse_path.is_empty() {
        io::write_text(&dir.join(MSE_PATH_FILE), &mse_path_csv(&result.dps))?;
    }
    if let Some(m) = &result.metrics {
        io::write_text(&dir.join(METRICS_FILE), &metrics_csv(m))?;
    }
    Ok(())
}
