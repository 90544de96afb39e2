//! Multiple scalar contour estimation (MSCE) and the history-matching baseline.
//!
//! MSCE reduces the series inverse problem to one scalar contour problem per
//! DPS time index. The problems are solved one after another on a shared,
//! growing training set; each follow-up run maximizes contour expected
//! improvement over a fresh random Latin hypercube of candidates. After the
//! budget is spent, one surrogate per DPS index is refitted on all runs and
//! the solution is read off the intersection of the per-index solution sets.
//!
//! History matching instead adds, stage by stage, every test point whose
//! maximal implausibility stays below a cutoff (capped per stage).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acquisition::{expected_improvement, implausibility, ContourTarget, DEFAULT_ALPHA};
use crate::designs::{maximin_lhd, maxpro_lhd, random_lhd, DesignError, DesignMatrix, DEFAULT_SWAP_ITERATIONS};
use crate::gp::{fit_gp, FitConfig, GpError, GpModel, Prediction};
use crate::math::{abs, sqrt};
use crate::metrics::SeriesMetrics;
use crate::rng::derive_seed;
use crate::simulators::{CountingSimulator, Simulator, SimulatorError};
use crate::spline_dps::{build_dps_with, DpsResult, ElbowRule, SplineError, TargetSeries, DEFAULT_K_MAX};

/// Inputs closer than this count as the same point.
pub const DUPLICATE_TOL: f64 = 1e-10;
/// How many times the extraction tolerance may be widened tenfold.
pub const MAX_EPSILON_WIDENINGS: u32 = 6;

// stream tags for derived seeds
const TAG_INITIAL: u64 = 1;
const TAG_CANDIDATES: u64 = 2;
const TAG_FIT: u64 = 3;
const TAG_GRID: u64 = 4;
const TAG_FINAL_FIT: u64 = 5;
const TAG_HM_TEST: u64 = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("budget of {available} follow-up runs cannot cover {problems} scalar problems")]
    Budget { available: usize, problems: usize },
    #[error("surrogate fit failed: {0}")]
    Fit(#[from] GpError),
    #[error("simulator failed: {0}")]
    Simulator(#[from] SimulatorError),
    #[error("DPS construction failed: {0}")]
    Dps(#[from] SplineError),
    #[error("design generation failed: {0}")]
    Design(#[from] DesignError),
}

fn config_err(msg: impl Into<String>) -> CalibrationError {
    CalibrationError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDesign {
    #[default]
    Maxpro,
    Maximin,
    Random,
}

impl InitialDesign {
    fn generate(self, n: usize, d: usize, seed: u64, iterations: usize) -> Result<DesignMatrix, DesignError> {
        match self {
            InitialDesign::Maxpro => maxpro_lhd(n, d, seed, iterations),
            InitialDesign::Maximin => maximin_lhd(n, d, seed, iterations),
            InitialDesign::Random => random_lhd(n, d, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MsceConfig {
    /// Initial design size.
    pub n0: usize,
    /// Total simulator runs, initial design included.
    pub budget: usize,
    pub k_max: usize,
    pub alpha: f64,
    /// Solution tolerance in response units.
    pub epsilon: f64,
    /// Candidate-set size per EI step.
    pub candidates: usize,
    pub seed: u64,
    /// Random points in the extraction grid (training inputs are added).
    pub grid_size: usize,
    pub initial_design: InitialDesign,
    pub design_iterations: usize,
    pub elbow: ElbowRule,
    /// Use these DPS indices, in this order, instead of building the DPS.
    pub dps_override: Option<Vec<usize>>,
    pub fit: FitConfig,
}

impl Default for MsceConfig {
    fn default() -> Self {
        Self {
            n0: 15,
            budget: 50,
            k_max: DEFAULT_K_MAX,
            alpha: DEFAULT_ALPHA,
            epsilon: 1e-5,
            candidates: 5000,
            seed: 0,
            grid_size: 10_000,
            initial_design: InitialDesign::Maxpro,
            design_iterations: DEFAULT_SWAP_ITERATIONS,
            elbow: ElbowRule::default(),
            dps_override: None,
            fit: FitConfig::default(),
        }
    }
}

impl MsceConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.n0 < 2 {
            return Err(config_err("n0 must be at least 2"));
        }
        if self.budget <= self.n0 {
            return Err(CalibrationError::Budget { available: self.budget.saturating_sub(self.n0), problems: 1 });
        }
        if !(self.epsilon > 0.0) {
            return Err(config_err("epsilon must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(config_err("alpha must be positive"));
        }
        if self.candidates < 100 {
            return Err(config_err("candidate set needs at least 100 points"));
        }
        if self.grid_size == 0 {
            return Err(config_err("grid_size must be positive"));
        }
        if self.k_max == 0 {
            return Err(config_err("k_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmConfig {
    pub n0: usize,
    /// Implausibility cutoff `c`.
    pub cutoff: f64,
    /// Test-set size per stage.
    pub candidates: usize,
    /// Most points added in one stage (lowest implausibility first).
    pub stage_cap: usize,
    pub max_stages: usize,
    pub seed: u64,
    pub initial_design: InitialDesign,
    pub design_iterations: usize,
    pub fit: FitConfig,
}

impl Default for HmConfig {
    fn default() -> Self {
        Self {
            n0: 15,
            cutoff: 3.0,
            candidates: 5000,
            stage_cap: 20,
            max_stages: 10,
            seed: 0,
            initial_design: InitialDesign::Maximin,
            design_iterations: DEFAULT_SWAP_ITERATIONS,
            fit: FitConfig::default(),
        }
    }
}

impl HmConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.n0 < 2 {
            return Err(config_err("n0 must be at least 2"));
        }
        if !(self.cutoff > 0.0) {
            return Err(config_err("cutoff must be positive"));
        }
        if self.candidates == 0 || self.stage_cap == 0 || self.max_stages == 0 {
            return Err(config_err("candidates, stage_cap and max_stages must be positive"));
        }
        Ok(())
    }
}

/// Where a training run came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Origin {
    Initial,
    /// Follow-up run of scalar problem `problem` (0-based position in the DPS).
    Contour { problem: usize },
    /// Point added in history-matching stage `stage` (1-based).
    HmStage { stage: usize },
}

/// Simulator runs so far, in call order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub inputs: DesignMatrix,
    /// One full series per run.
    pub responses: Vec<Vec<f64>>,
    pub origins: Vec<Origin>,
}

impl TrainingSet {
    pub fn new(d: usize) -> Self {
        Self { inputs: DesignMatrix::empty(d), responses: Vec::new(), origins: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Runs the simulator at `x` and records the result.
    pub fn run<S: Simulator + ?Sized>(&mut self, sim: &S, x: &[f64], origin: Origin) -> Result<(), CalibrationError> {
        let series = sim.evaluate(x)?;
        if series.len() != sim.series_len() {
            return Err(CalibrationError::Simulator(SimulatorError::new(
                crate::simulators::SimulatorErrorKind::Protocol,
                alloc::format!("expected {} values, got {}", sim.series_len(), series.len()),
            )));
        }
        self.inputs.push_row(x);
        self.responses.push(series);
        self.origins.push(origin);
        Ok(())
    }

    /// Responses at a 1-based time index.
    pub fn scalar_responses(&self, t_index: usize) -> Vec<f64> {
        self.responses.iter().map(|s| s[t_index - 1]).collect()
    }

    pub fn contains_near(&self, x: &[f64], tol: f64) -> bool {
        self.inputs.rows().any(|r| sqrt(r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum()) < tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ExpectedImprovement,
    MaxImplausibility,
}

/// One chosen follow-up run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogEntry {
    /// 0-based index of the run in the training set.
    pub run: usize,
    pub origin: Origin,
    /// DPS time index the criterion was computed for (HM: all of them).
    pub t_index: Option<usize>,
    pub point: Vec<f64>,
    pub criterion: Criterion,
    pub value: f64,
}

/// Per-index solution set on the extraction grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub t_index: usize,
    pub target: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub x_opt: Vec<f64>,
    /// Tolerance that produced a nonempty intersection (the last one tried
    /// under `fallback`).
    pub epsilon_used: f64,
    pub widenings: u32,
    /// No tolerance gave a nonempty intersection; `x_opt` minimizes the
    /// largest absolute deviation instead.
    pub fallback: bool,
    pub solution_sets: Vec<SolutionSet>,
    /// Rows of the extraction points inside every solution set.
    pub intersection: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HmStop {
    /// A stage found no new plausible point.
    NoPlausible,
    StageLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmSummary {
    pub cutoff: f64,
    pub stages: usize,
    pub stop: HmStop,
    /// Points added in each completed stage.
    pub added_per_stage: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Msce,
    HistoryMatching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub method: Method,
    pub training: TrainingSet,
    pub dps: DpsResult,
    /// Estimated inverse input in scaled units.
    pub x_opt: Vec<f64>,
    /// Simulator series at `x_opt`.
    pub solution_series: Vec<f64>,
    /// `None` when the metrics are undefined (constant target).
    pub metrics: Option<SeriesMetrics>,
    pub extraction: Option<Extraction>,
    pub hm: Option<HmSummary>,
    pub run_log: Vec<RunLogEntry>,
    /// Simulator calls spent on the training set.
    pub simulator_calls: usize,
}

/// Follow-up runs per scalar problem: `floor((N - n0)/k)` each, with the
/// remainder going one apiece to the first problems.
pub fn budget_split(follow_ups: usize, k: usize) -> Vec<usize> {
    let (base, rem) = (follow_ups / k, follow_ups % k);
    (0..k).map(|j| base + usize::from(j < rem)).collect()
}

fn fit_config(base: &FitConfig, seed: u64, path: &[u64]) -> FitConfig {
    FitConfig { seed: derive_seed(seed, path), ..base.clone() }
}

/// Options for one scalar contour solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourOptions<'a> {
    pub alpha: f64,
    pub candidates: usize,
    pub seed: u64,
    pub fit: &'a FitConfig,
    /// Position of this problem in the DPS (for logging and seeding).
    pub problem: usize,
}

/// Adds `budget` EI-chosen runs for the contour `g(x, t_index) = level`.
///
/// Each step fits a surrogate to the scalar responses at `t_index`, scores a
/// fresh candidate set by expected improvement and runs the simulator at the
/// best candidate not already in the training set.
pub fn solve_scalar_contour<S: Simulator + ?Sized>(
    sim: &S,
    t_index: usize,
    level: f64,
    training: &mut TrainingSet,
    budget: usize,
    opts: &ContourOptions<'_>,
    log: &mut Vec<RunLogEntry>,
) -> Result<(), CalibrationError> {
    if training.is_empty() {
        return Err(config_err("scalar contour solve needs a nonempty training set"));
    }
    let target = ContourTarget::new(level, opts.alpha);
    let d = sim.dim();
    for step in 0..budget {
        let run = training.len();
        let y = training.scalar_responses(t_index);
        let cfg = fit_config(opts.fit, opts.seed, &[TAG_FIT, opts.problem as u64, step as u64]);
        let model = fit_gp(&training.inputs, &y, &cfg)?;
        let cands = random_lhd(opts.candidates, d, derive_seed(opts.seed, &[TAG_CANDIDATES, run as u64]))?;
        let ei: Vec<f64> = model
            .predict_many(&cands)
            .iter()
            .map(|p| expected_improvement(p.mean, p.sd(), target))
            .collect();
        let mut order: Vec<usize> = (0..cands.n()).collect();
        order.sort_by(|&a, &b| ei[b].total_cmp(&ei[a]).then(a.cmp(&b)));
        let pick = order
            .into_iter()
            .find(|&i| !training.contains_near(cands.row(i), DUPLICATE_TOL))
            .ok_or_else(|| config_err("every candidate duplicates a training input"))?;
        let x = cands.row(pick).to_vec();
        let origin = Origin::Contour { problem: opts.problem };
        training.run(sim, &x, origin)?;
        log.push(RunLogEntry {
            run,
            origin,
            t_index: Some(t_index),
            point: x,
            criterion: Criterion::ExpectedImprovement,
            value: ei[pick],
        });
    }
    Ok(())
}

/// Reads the inverse solution off surrogate predictions.
///
/// `predictions[i][p]` is model `i`'s prediction at point `p`. The solution
/// set of index `i` holds the points with `|g_hat_i - target_i| < epsilon`.
/// Within the intersection, `x_opt` minimizes `sum_i (g_hat_i - target_i)^2`.
/// An empty intersection widens `epsilon` tenfold, up to
/// [`MAX_EPSILON_WIDENINGS`] times, before falling back to the minimax point.
pub fn extract_solution(
    points: &DesignMatrix,
    predictions: &[Vec<Prediction>],
    targets: &[(usize, f64)],
    epsilon: f64,
) -> Extraction {
    assert_eq!(predictions.len(), targets.len());
    assert!(points.n() > 0, "extraction needs at least one point");
    let np = points.n();
    let dev = |i: usize, p: usize| predictions[i][p].mean - targets[i].1;
    let mut eps = epsilon;
    for widenings in 0..=MAX_EPSILON_WIDENINGS {
        let inside = |i: usize, p: usize| abs(dev(i, p)) < eps;
        let intersection: Vec<usize> = (0..np).filter(|&p| (0..targets.len()).all(|i| inside(i, p))).collect();
        if !intersection.is_empty() {
            let score = |p: usize| (0..targets.len()).map(|i| dev(i, p) * dev(i, p)).sum::<f64>();
            let mut best = intersection[0];
            for &p in &intersection[1..] {
                if score(p) < score(best) {
                    best = p;
                }
            }
            let solution_sets = targets
                .iter()
                .enumerate()
                .map(|(i, &(t_index, target))| SolutionSet { t_index, target, size: (0..np).filter(|&p| inside(i, p)).count() })
                .collect();
            return Extraction {
                x_opt: points.row(best).to_vec(),
                epsilon_used: eps,
                widenings,
                fallback: false,
                solution_sets,
                intersection,
            };
        }
        if widenings < MAX_EPSILON_WIDENINGS {
            eps *= 10.0;
        }
    }
    let worst = |p: usize| (0..targets.len()).map(|i| abs(dev(i, p))).fold(0.0, f64::max);
    let mut best = 0;
    for p in 1..np {
        if worst(p) < worst(best) {
            best = p;
        }
    }
    let solution_sets = targets
        .iter()
        .enumerate()
        .map(|(i, &(t_index, target))| SolutionSet { t_index, target, size: (0..np).filter(|&p| abs(dev(i, p)) < eps).count() })
        .collect();
    Extraction {
        x_opt: points.row(best).to_vec(),
        epsilon_used: eps,
        widenings: MAX_EPSILON_WIDENINGS,
        fallback: true,
        solution_sets,
        intersection: Vec::new(),
    }
}

fn check_simulator<S: Simulator + ?Sized>(sim: &S, target: &TargetSeries) -> Result<(), CalibrationError> {
    if sim.series_len() != target.len() {
        return Err(config_err(alloc::format!(
            "simulator produces {} values but the target has {}",
            sim.series_len(),
            target.len()
        )));
    }
    if sim.dim() == 0 {
        return Err(config_err("simulator has no inputs"));
    }
    Ok(())
}

fn resolve_dps(target: &TargetSeries, k_max: usize, elbow: ElbowRule, over: &Option<Vec<usize>>) -> Result<DpsResult, CalibrationError> {
    match over {
        Some(idx) => {
            if idx.is_empty() || idx.iter().any(|&i| i < 1 || i > target.len()) {
                return Err(config_err("DPS override indices must lie in 1..=L"));
            }
            Ok(DpsResult::fixed(idx.clone()))
        }
        None => Ok(build_dps_with(target, k_max.min(target.max_knots()), elbow)?),
    }
}

fn initial_training<S: Simulator + ?Sized>(
    sim: &S,
    n0: usize,
    design: InitialDesign,
    iterations: usize,
    seed: u64,
) -> Result<TrainingSet, CalibrationError> {
    let d = sim.dim();
    let x0 = design.generate(n0, d, derive_seed(seed, &[TAG_INITIAL]), iterations)?;
    let mut training = TrainingSet::new(d);
    for row in x0.rows() {
        training.run(sim, row, Origin::Initial)?;
    }
    Ok(training)
}

/// Runs MSCE end to end. The simulator is called exactly `budget` times for
/// the training set, plus once at the solution for the reported metrics.
pub fn msce_run<S: Simulator + ?Sized>(sim: &S, target: &TargetSeries, cfg: &MsceConfig) -> Result<CalibrationResult, CalibrationError> {
    cfg.validate()?;
    check_simulator(sim, target)?;
    let dps = resolve_dps(target, cfg.k_max, cfg.elbow, &cfg.dps_override)?;
    let k = dps.dps.len();
    let follow_ups = cfg.budget - cfg.n0;
    if follow_ups < k {
        return Err(CalibrationError::Budget { available: follow_ups, problems: k });
    }

    let counted = CountingSimulator::new(sim);
    let mut training = initial_training(&counted, cfg.n0, cfg.initial_design, cfg.design_iterations, cfg.seed)?;
    let mut run_log = Vec::new();
    for (j, (&t_index, budget_j)) in dps.dps.iter().zip(budget_split(follow_ups, k)).enumerate() {
        let opts = ContourOptions { alpha: cfg.alpha, candidates: cfg.candidates, seed: cfg.seed, fit: &cfg.fit, problem: j };
        solve_scalar_contour(&counted, t_index, target.value_at(t_index), &mut training, budget_j, &opts, &mut run_log)?;
    }
    let calls = counted.calls();
    assert_eq!(calls, cfg.budget, "MSCE must spend exactly the configured budget");

    let models = dps
        .dps
        .iter()
        .enumerate()
        .map(|(j, &t)| fit_gp(&training.inputs, &training.scalar_responses(t), &fit_config(&cfg.fit, cfg.seed, &[TAG_FINAL_FIT, j as u64])))
        .collect::<Result<Vec<GpModel>, _>>()?;
    let mut grid = random_lhd(cfg.grid_size, sim.dim(), derive_seed(cfg.seed, &[TAG_GRID]))?;
    grid.extend(&training.inputs);
    let predictions: Vec<Vec<Prediction>> = models.iter().map(|m| m.predict_many(&grid)).collect();
    let targets: Vec<(usize, f64)> = dps.dps.iter().map(|&t| (t, target.value_at(t))).collect();
    let extraction = extract_solution(&grid, &predictions, &targets, cfg.epsilon);

    let solution_series = sim.evaluate(&extraction.x_opt)?;
    let metrics = SeriesMetrics::compute(&solution_series, target.values()).ok();
    Ok(CalibrationResult {
        method: Method::Msce,
        training,
        dps,
        x_opt: extraction.x_opt.clone(),
        solution_series,
        metrics,
        extraction: Some(extraction),
        hm: None,
        run_log,
        simulator_calls: calls,
    })
}

/// Multi-stage history matching on the given DPS.
pub fn hm_run<S: Simulator + ?Sized>(sim: &S, target: &TargetSeries, dps: &DpsResult, cfg: &HmConfig) -> Result<CalibrationResult, CalibrationError> {
    cfg.validate()?;
    check_simulator(sim, target)?;
    if dps.dps.is_empty() || dps.dps.iter().any(|&t| t < 1 || t > target.len()) {
        return Err(config_err("DPS indices must lie in 1..=L"));
    }
    let d = sim.dim();
    let counted = CountingSimulator::new(sim);
    let mut training = initial_training(&counted, cfg.n0, cfg.initial_design, cfg.design_iterations, cfg.seed)?;
    let targets: Vec<f64> = dps.dps.iter().map(|&t| target.value_at(t)).collect();
    let mut run_log = Vec::new();
    let mut added_per_stage = Vec::new();
    let mut stop = HmStop::StageLimit;

    for stage in 1..=cfg.max_stages {
        let models = dps
            .dps
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                fit_gp(&training.inputs, &training.scalar_responses(t), &fit_config(&cfg.fit, cfg.seed, &[TAG_FIT, stage as u64, j as u64]))
            })
            .collect::<Result<Vec<GpModel>, _>>()?;
        let test = random_lhd(cfg.candidates, d, derive_seed(cfg.seed, &[TAG_HM_TEST, stage as u64]))?;
        let preds: Vec<Vec<Prediction>> = models.iter().map(|m| m.predict_many(&test)).collect();
        let im: Vec<f64> = (0..test.n())
            .map(|p| {
                preds
                    .iter()
                    .zip(&targets)
                    .map(|(pr, &g0)| implausibility(pr[p].mean, pr[p].sd(), g0))
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut plausible: Vec<usize> = (0..test.n()).filter(|&p| im[p] <= cfg.cutoff).collect();
        plausible.sort_by(|&a, &b| im[a].total_cmp(&im[b]).then(a.cmp(&b)));
        let mut added = 0;
        for p in plausible {
            if added == cfg.stage_cap {
                break;
            }
            let x = test.row(p);
            if training.contains_near(x, DUPLICATE_TOL) {
                continue;
            }
            let run = training.len();
            let origin = Origin::HmStage { stage };
            training.run(&counted, x, origin)?;
            run_log.push(RunLogEntry {
                run,
                origin,
                t_index: None,
                point: x.to_vec(),
                criterion: Criterion::MaxImplausibility,
                value: im[p],
            });
            added += 1;
        }
        if added == 0 {
            stop = HmStop::NoPlausible;
            break;
        }
        added_per_stage.push(added);
    }

    let calls = counted.calls();
    debug_assert_eq!(calls, training.len());
    let discrepancy = |s: &[f64]| dps.dps.iter().zip(&targets).map(|(&t, g0)| (s[t - 1] - g0) * (s[t - 1] - g0)).sum::<f64>();
    let mut best = 0;
    for i in 1..training.len() {
        if discrepancy(&training.responses[i]) < discrepancy(&training.responses[best]) {
            best = i;
        }
    }
    let x_opt = training.inputs.row(best).to_vec();
    let solution_series = training.responses[best].clone();
    let metrics = SeriesMetrics::compute(&solution_series, target.values()).ok();
    Ok(CalibrationResult {
        method: Method::HistoryMatching,
        dps: dps.clone(),
        x_opt,
        solution_series,
        metrics,
        extraction: None,
        hm: Some(HmSummary { cutoff: cfg.cutoff, stages: added_per_stage.len() + usize::from(stop == HmStop::NoPlausible), stop, added_per_stage }),
        run_log,
        simulator_calls: calls,
        training,
    })
}
