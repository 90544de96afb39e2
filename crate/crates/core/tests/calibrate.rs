use dyncal_core::calibrate::{budget_split, HmStop, Origin};
use dyncal_core::simulators::{CountingSimulator, Simulator, SimulatorError};
use dyncal_core::{
    build_dps, fit_gp, hm_run, msce_run, BuiltinSimulator, CalibrationError, FitConfig, HmConfig, MsceConfig, TargetSeries,
};
use proptest::prelude::*;

fn easom_target() -> (BuiltinSimulator, TargetSeries) {
    let sim = BuiltinSimulator::easom();
    let target = TargetSeries::new(sim.times().to_vec(), sim.reference_series()).unwrap();
    (sim, target)
}

fn quick_config(seed: u64) -> MsceConfig {
    MsceConfig { n0: 10, budget: 25, candidates: 1000, grid_size: 2000, seed, ..MsceConfig::default() }
}

#[test]
fn msce_spends_exactly_the_budget() {
    let (sim, target) = easom_target();
    let counted = CountingSimulator::new(&sim);
    let cfg = quick_config(3);
    let r = msce_run(&counted, &target, &cfg).unwrap();
    assert_eq!(r.simulator_calls, cfg.budget);
    assert_eq!(r.training.len(), cfg.budget);
    assert_eq!(r.training.responses.len(), cfg.budget);
    // plus the one reporting call at the solution
    assert_eq!(counted.calls(), cfg.budget + 1);
}

#[test]
fn msce_training_set_is_well_formed() {
    let (sim, target) = easom_target();
    let cfg = quick_config(4);
    let r = msce_run(&sim, &target, &cfg).unwrap();
    assert_eq!(r.dps.dps, vec![145, 37, 132]);
    assert!(r.training.inputs.min_distance() > 1e-10);
    let initial = r.training.origins.iter().filter(|o| **o == Origin::Initial).count();
    assert_eq!(initial, cfg.n0);
    for (j, want) in budget_split(cfg.budget - cfg.n0, 3).into_iter().enumerate() {
        let got = r.training.origins.iter().filter(|o| **o == Origin::Contour { problem: j }).count();
        assert_eq!(got, want, "problem {j}");
    }
    // problems are solved in DPS order
    let problems: Vec<usize> = r
        .training
        .origins
        .iter()
        .filter_map(|o| match o {
            Origin::Contour { problem } => Some(*problem),
            _ => None,
        })
        .collect();
    assert!(problems.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(r.run_log.len(), cfg.budget - cfg.n0);
    assert!(r.run_log.iter().all(|e| e.value >= 0.0));
    assert!(r.x_opt.iter().all(|v| (0.0..=1.0).contains(v)));
    let ex = r.extraction.as_ref().unwrap();
    assert_eq!(ex.solution_sets.len(), 3);
    assert_eq!(r.solution_series, sim.evaluate(&r.x_opt).unwrap());
}

#[test]
fn final_surrogates_interpolate_and_have_nonnegative_variance() {
    let (sim, target) = easom_target();
    let r = msce_run(&sim, &target, &quick_config(5)).unwrap();
    for &t in &r.dps.dps {
        let y = r.training.scalar_responses(t);
        let m = fit_gp(&r.training.inputs, &y, &FitConfig::default()).unwrap();
        let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (row, &yi) in r.training.inputs.rows().zip(&y) {
            let p = m.predict(row);
            assert!(p.variance >= 0.0);
            assert!((p.mean - yi).abs() <= 1e-5 * scale, "t={t}: {} vs {yi}", p.mean);
        }
    }
}

#[test]
fn identical_seeds_give_identical_results() {
    let (sim, target) = easom_target();
    let a = msce_run(&sim, &target, &quick_config(6)).unwrap();
    let b = msce_run(&sim, &target, &quick_config(6)).unwrap();
    assert_eq!(a, b);
    let c = msce_run(&sim, &target, &quick_config(7)).unwrap();
    assert_ne!(a.training, c.training);
}

#[test]
fn budget_below_problem_count_is_rejected() {
    let (sim, target) = easom_target();
    let cfg = MsceConfig { n0: 10, budget: 12, ..quick_config(0) };
    assert_eq!(msce_run(&sim, &target, &cfg), Err(CalibrationError::Budget { available: 2, problems: 3 }));
    let cfg = MsceConfig { n0: 10, budget: 13, ..quick_config(0) };
    let r = msce_run(&sim, &target, &cfg).unwrap();
    assert_eq!(r.simulator_calls, 13);
}

#[test]
fn dps_override_sets_problem_order() {
    let (sim, target) = easom_target();
    let cfg = MsceConfig { dps_override: Some(vec![37, 145]), ..quick_config(8) };
    let r = msce_run(&sim, &target, &cfg).unwrap();
    assert_eq!(r.dps.dps, vec![37, 145]);
    assert_eq!(r.run_log[0].t_index, Some(37));
    assert_eq!(r.run_log.last().unwrap().t_index, Some(145));
}

#[test]
fn tiny_cutoff_stops_after_first_stage() {
    let (sim, target) = easom_target();
    let dps = build_dps(&target, 10).unwrap();
    let cfg = HmConfig { n0: 12, cutoff: 1e-300, candidates: 500, ..HmConfig::default() };
    let r = hm_run(&sim, &target, &dps, &cfg).unwrap();
    assert_eq!(r.training.len(), 12);
    assert_eq!(r.simulator_calls, 12);
    let hm = r.hm.unwrap();
    assert_eq!(hm.stop, HmStop::NoPlausible);
    assert_eq!(hm.stages, 1);
    assert!(hm.added_per_stage.is_empty());
}

#[test]
fn hm_augments_only_plausible_points_within_caps() {
    let (sim, target) = easom_target();
    let dps = build_dps(&target, 10).unwrap();
    let cfg = HmConfig { n0: 12, cutoff: 2.0, candidates: 1000, stage_cap: 5, max_stages: 3, ..HmConfig::default() };
    let r = hm_run(&sim, &target, &dps, &cfg).unwrap();
    assert!(r.run_log.iter().all(|e| e.value <= cfg.cutoff));
    let hm = r.hm.as_ref().unwrap();
    assert!(hm.added_per_stage.iter().all(|&a| (1..=5).contains(&a)));
    assert!(hm.stages <= 3);
    assert_eq!(r.training.len(), 12 + hm.added_per_stage.iter().sum::<usize>());
    assert!(r.training.inputs.min_distance() > 1e-10);
    // the reported solution is the best training run on the DPS
    let score = |s: &[f64]| dps.dps.iter().map(|&t| (s[t - 1] - target.value_at(t)).powi(2)).sum::<f64>();
    let best = r.training.responses.iter().map(|s| score(s)).fold(f64::INFINITY, f64::min);
    assert_eq!(score(&r.solution_series), best);
}

#[test]
fn invalid_hm_cutoff_is_rejected() {
    let (sim, target) = easom_target();
    let dps = build_dps(&target, 10).unwrap();
    for c in [0.0, -1.0] {
        let cfg = HmConfig { cutoff: c, ..HmConfig::default() };
        assert!(matches!(hm_run(&sim, &target, &dps, &cfg), Err(CalibrationError::Config(_))));
    }
}

/// A user-supplied simulator: a damped oscillation with two parameters.
struct Oscillator {
    times: Vec<f64>,
}

impl Simulator for Oscillator {
    fn name(&self) -> &str {
        "oscillator"
    }
    fn dim(&self) -> usize {
        2
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SimulatorError> {
        Ok(self.times.iter().map(|t| (-(0.5 + x[0]) * t).exp() * (3.0 * (1.0 + x[1]) * t).cos()).collect())
    }
}

#[test]
fn custom_simulators_plug_in() {
    let sim = Oscillator { times: (0..60).map(|i| i as f64 * 0.05).collect() };
    let target = TargetSeries::new(sim.times.clone(), sim.evaluate(&[0.3, 0.6]).unwrap()).unwrap();
    let cfg = MsceConfig { n0: 10, budget: 30, candidates: 1000, grid_size: 3000, epsilon: 1e-3, k_max: 5, ..MsceConfig::default() };
    let r = msce_run(&sim, &target, &cfg).unwrap();
    assert_eq!(r.simulator_calls, 30);
    assert!(r.metrics.unwrap().rmse < 0.05, "{:?}", r.metrics);
}

proptest! {
    #[test]
    fn budget_split_is_balanced(total in 0usize..500, k in 1usize..12) {
        let parts = budget_split(total, k);
        prop_assert_eq!(parts.len(), k);
        prop_assert_eq!(parts.iter().sum::<usize>(), total);
        prop_assert!(parts.windows(2).all(|w| w[0] >= w[1] && w[0] - w[1] <= 1));
        prop_assert!(parts.iter().all(|&p| p == total / k || p == total / k + 1));
    }
}
