//! Ordinary kriging with a power-exponential correlation.
//!
//! The model is `y(x) = mu + Z(x)` with
//! `Cov(Z(x_i), Z(x_j)) = sigma^2 prod_k exp(-theta_k |x_ik - x_jk|^p_k)`.
//! Correlation decay rates are estimated by maximizing the profile
//! log-likelihood over a log-scale box with multistart Nelder-Mead; `mu` and
//! `sigma^2` have closed-form profile estimates.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::{random_lhd, DesignMatrix};
use crate::linalg::{dot, Cholesky};
use crate::math::{abs, exp, ln, powf};
use crate::par::map_indices;
use crate::rng::derive_seed;

/// Smoothness exponent used unless configured otherwise.
pub const DEFAULT_POWER: f64 = 1.95;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("need at least 2 training points, got {0}")]
    TooFewPoints(usize),
    #[error("{inputs} inputs but {responses} responses")]
    LengthMismatch { inputs: usize, responses: usize },
    #[error("training responses must be finite")]
    NonFiniteResponse,
    #[error("invalid correlation parameters: {0}")]
    InvalidSpec(&'static str),
    #[error("correlation matrix is not positive definite even with nugget {nugget:e}")]
    Fit { nugget: f64 },
}

/// Power-exponential correlation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    power: Vec<f64>,
    theta: Vec<f64>,
}

impl CorrelationSpec {
    pub fn new(power: Vec<f64>, theta: Vec<f64>) -> Result<Self, GpError> {
        if power.len() != theta.len() || power.is_empty() {
            return Err(GpError::InvalidSpec("power and theta must have equal, positive length"));
        }
        if !power.iter().all(|&p| p > 0.0 && p <= 2.0) {
            return Err(GpError::InvalidSpec("smoothness must lie in (0, 2]"));
        }
        if !theta.iter().all(|&t| t >= 0.0 && t.is_finite()) {
            return Err(GpError::InvalidSpec("theta must be finite and nonnegative"));
        }
        Ok(Self { power, theta })
    }

    /// Same smoothness `p` in every dimension.
    pub fn with_power(p: f64, theta: Vec<f64>) -> Result<Self, GpError> {
        Self::new(alloc::vec![p; theta.len()], theta)
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// `exp(-sum_k theta_k |a_k - b_k|^p_k)`
pub fn correlation(spec: &CorrelationSpec, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..spec.theta.len() {
        let diff = abs(a[k] - b[k]);
        if diff > 0.0 {
            s += spec.theta[k] * powf(diff, spec.power[k]);
        }
    }
    exp(-s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Smoothness exponent applied to every input dimension.
    pub power: f64,
    /// Search box for `log10(theta_k)`.
    pub log10_theta_bounds: (f64, f64),
    pub starts: usize,
    /// Likelihood evaluations per start.
    pub max_evals: usize,
    pub nugget_start: f64,
    pub nugget_max: f64,
    /// Seeds the multistart design.
    pub seed: u64,
    /// Skip estimation and use these decay rates.
    pub fixed_theta: Option<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            power: DEFAULT_POWER,
            log10_theta_bounds: (-2.0, 2.0),
            starts: 5,
            max_evals: 500,
            nugget_start: 1e-8,
            nugget_max: 1e-4,
            seed: 0,
            fixed_theta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    /// Predictive variance `s^2`, clamped at zero.
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

/// JSON-friendly snapshot of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModelRecord {
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub nugget: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// A fitted, immutable ordinary-kriging surrogate.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: DesignMatrix,
    responses: Vec<f64>,
    spec: CorrelationSpec,
    mu_hat: f64,
    sigma2_hat: f64,
    nugget: f64,
    chol: Cholesky,
    /// `(R + nugget I)^-1 (y - 1 mu_hat)`
    weights: Vec<f64>,
    log_likelihood: f64,
}

/// Pairwise `|x_ik - x_jk|^p` for `i < j`, reused across likelihood evaluations.
struct PowDistances {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl PowDistances {
    fn new(x: &DesignMatrix, power: &[f64]) -> Self {
        let (n, d) = (x.n(), x.d());
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2 * d);
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (x.row(i), x.row(j));
                for k in 0..d {
                    let diff = abs(a[k] - b[k]);
                    values.push(if diff > 0.0 { powf(diff, power[k]) } else { 0.0 });
                }
            }
        }
        Self { n, d, values }
    }

    fn correlation_matrix(&self, theta: &[f64], nugget: f64) -> Vec<f64> {
        let n = self.n;
        let mut r = alloc::vec![0.0; n * n];
        let mut idx = 0;
        for i in 0..n {
            r[i * n + i] = 1.0 + nugget;
            for j in (i + 1)..n {
                let s: f64 = self.values[idx..idx + self.d].iter().zip(theta).map(|(v, t)| v * t).sum();
                idx += self.d;
                let c = exp(-s);
                r[i * n + j] = c;
                r[j * n + i] = c;
            }
        }
        r
    }
}

struct Factored {
    chol: Cholesky,
    nugget: f64,
}

fn factor_with_nugget(dist: &PowDistances, theta: &[f64], cfg: &FitConfig) -> Option<Factored> {
    let mut nugget = cfg.nugget_start;
    loop {
        let r = dist.correlation_matrix(theta, nugget);
        if let Some(chol) = Cholesky::factor(&r, dist.n) {
            return Some(Factored { chol, nugget });
        }
        if nugget >= cfg.nugget_max {
            return None;
        }
        nugget = (nugget * 10.0).min(cfg.nugget_max);
    }
}

/// Closed-form profile estimates for a factored correlation matrix:
/// `(mu_hat, sigma2_hat, weights)`.
fn profile_estimates(chol: &Cholesky, y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = y.len();
    let ones = alloc::vec![1.0; n];
    let rinv_one = chol.solve(&ones);
    let mu = rinv_one.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / rinv_one.iter().sum::<f64>();
    let resid: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let weights = chol.solve(&resid);
    let sigma2 = (dot(&resid, &weights) / n as f64).max(0.0);
    (mu, sigma2, weights)
}

/// Profile log-likelihood (constants dropped): `-(n/2) ln sigma2_hat - (1/2) ln|R|`.
fn profile_ll(chol: &Cholesky, y: &[f64]) -> f64 {
    let (_, sigma2, _) = profile_estimates(chol, y);
    if !(sigma2 > 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = y.len() as f64;
    let ll = -0.5 * n * ln(sigma2) - 0.5 * chol.log_det();
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}

fn validate(x: &DesignMatrix, y: &[f64]) -> Result<(), GpError> {
    if x.n() != y.len() {
        return Err(GpError::LengthMismatch { inputs: x.n(), responses: y.len() });
    }
    if x.n() < 2 {
        return Err(GpError::TooFewPoints(x.n()));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(GpError::NonFiniteResponse);
    }
    Ok(())
}

/// Profile log-likelihood of `(x, y)` at the given decay rates, or `None` when
/// no admissible nugget makes the correlation matrix positive definite.
/// Responses are standardized first, exactly as in [`fit_gp`].
pub fn profile_log_likelihood(x: &DesignMatrix, y: &[f64], theta: &[f64], cfg: &FitConfig) -> Option<f64> {
    validate(x, y).ok()?;
    let ys = standardize(y)?.0;
    let dist = PowDistances::new(x, &alloc::vec![cfg.power; x.d()]);
    let f = factor_with_nugget(&dist, theta, cfg)?;
    Some(profile_ll(&f.chol, &ys))
}

/// Standardized responses with the (mean, sd) used, or `None` for constant data.
fn standardize(y: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    if !(sd > 0.0) || sd <= 1e-300 || y.iter().all(|&v| v == y[0]) {
        return None;
    }
    Some((y.iter().map(|v| (v - mean) / sd).collect(), mean, sd))
}

/// Fits an ordinary-kriging model to `(x, y)`.
pub fn fit_gp(x: &DesignMatrix, y: &[f64], cfg: &FitConfig) -> Result<GpModel, GpError> {
    validate(x, y)?;
    let d = x.d();
    let power = alloc::vec![cfg.power; d];
    let dist = PowDistances::new(x, &power);

    let Some((ys, _, _)) = standardize(y) else {
        let theta = cfg.fixed_theta.clone().unwrap_or_else(|| alloc::vec![1.0; d]);
        let spec = CorrelationSpec::new(power, theta)?;
        let f = factor_with_nugget(&dist, spec.theta(), cfg).ok_or(GpError::Fit { nugget: cfg.nugget_max })?;
        return Ok(GpModel {
            inputs: x.clone(),
            responses: y.to_vec(),
            spec,
            mu_hat: y[0],
            sigma2_hat: 0.0,
            nugget: f.nugget,
            chol: f.chol,
            weights: alloc::vec![0.0; y.len()],
            log_likelihood: f64::INFINITY,
        });
    };

    let theta = match &cfg.fixed_theta {
        Some(t) => {
            if t.len() != d {
                return Err(GpError::InvalidSpec("fixed theta length must match input dimension"));
            }
            t.clone()
        }
        None => {
            let objective = |z: &[f64]| -> f64 {
                let theta: Vec<f64> = z.iter().map(|&v| powf(10.0, v)).collect();
                match factor_with_nugget(&dist, &theta, cfg) {
                    Some(f) => -profile_ll(&f.chol, &ys),
                    None => f64::INFINITY,
                }
            };
            let (lo, hi) = cfg.log10_theta_bounds;
            let starts = start_points(d, cfg);
            let results = map_indices(starts.len(), |s| nelder_mead(&objective, &starts[s], lo, hi, cfg.max_evals));
            // lowest start index wins ties
            let mut best: Option<&(Vec<f64>, f64)> = None;
            for r in &results {
                if best.map_or(true, |b| r.1 < b.1) {
                    best = Some(r);
                }
            }
            let (z, value) = best.expect("at least one start");
            if !value.is_finite() {
                return Err(GpError::Fit { nugget: cfg.nugget_max });
            }
            z.iter().map(|&v| powf(10.0, v)).collect()
        }
    };

    let spec = CorrelationSpec::new(power, theta)?;
    let f = factor_with_nugget(&dist, spec.theta(), cfg).ok_or(GpError::Fit { nugget: cfg.nugget_max })?;
    let log_likelihood = profile_ll(&f.chol, &ys);
    let (mu_hat, sigma2_hat, weights) = profile_estimates(&f.chol, y);
    Ok(GpModel {
        inputs: x.clone(),
        responses: y.to_vec(),
        spec,
        mu_hat,
        sigma2_hat,
        nugget: f.nugget,
        chol: f.chol,
        weights,
        log_likelihood,
    })
}

/// Multistart locations in the log10 box: a random LHD, scaled.
fn start_points(d: usize, cfg: &FitConfig) -> Vec<Vec<f64>> {
    let (lo, hi) = cfg.log10_theta_bounds;
    let design = random_lhd(cfg.starts.max(1), d, derive_seed(cfg.seed, &[0x6770])).expect("starts >= 1, d >= 1");
    design.rows().map(|r| r.iter().map(|u| lo + (hi - lo) * u).collect()).collect()
}

/// Decay rates at which [`fit_gp`] starts its local searches.
pub fn multistart_thetas(d: usize, cfg: &FitConfig) -> Vec<Vec<f64>> {
    start_points(d, cfg).into_iter().map(|z| z.into_iter().map(|v| powf(10.0, v)).collect()).collect()
}

/// Bounded Nelder-Mead on the box `[lo, hi]^d`. A collapsed simplex is
/// rebuilt around the incumbent while evaluations remain, and the search
/// stops once a restart no longer improves it.
///
/// Returns the best point and value; the start is the first evaluated vertex,
/// so the result is never worse than the start.
fn nelder_mead(f: &impl Fn(&[f64]) -> f64, start: &[f64], lo: f64, hi: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let clamp = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x.clamp(lo, hi)).collect() };
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut evals = 0usize;
    let x0 = clamp(start);
    let f0 = eval(&x0, &mut evals);
    let mut best = (x0, f0);
    while evals < max_evals {
        let before = best.1;
        best = nm_pass(&eval, &clamp, best, lo, hi, max_evals, &mut evals);
        let gain = before - best.1;
        if !(gain > 1e-9 * (1.0 + abs(best.1))) {
            break;
        }
    }
    best
}

fn nm_pass(
    eval: &impl Fn(&[f64], &mut usize) -> f64,
    clamp: &impl Fn(&[f64]) -> Vec<f64>,
    (x0, f0): (Vec<f64>, f64),
    lo: f64,
    hi: f64,
    max_evals: usize,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let step = 0.1 * (hi - lo);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.clone(), f0));
    for k in 0..d {
        let mut x = x0.clone();
        x[k] = if x[k] + step <= hi { x[k] + step } else { x[k] - step };
        let fx = eval(&x, evals);
        simplex.push((x, fx));
    }
    while *evals < max_evals {
        // stable sort keeps earlier vertices first on ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| abs(a - b)))
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= 1e-10 * (1.0 + abs(simplex[0].1))) && size <= 1e-6 {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|(x, _)| x[k]).sum::<f64>() / d as f64).collect();
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> { clamp(&(0..d).map(|k| centroid[k] + t * (worst.0[k] - centroid[k])).collect::<Vec<_>>()) };
        let xr = along(-1.0);
        let fr = eval(&xr, evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, evals);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fc = eval(&xc, evals);
            if fc < worst.1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = clamp(&v.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect::<Vec<_>>());
                    let fx = eval(&x, evals);
                    *v = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    // the incumbent is a vertex, so this never gets worse
    if simplex[0].1 <= f0 {
        simplex.swap_remove(0)
    } else {
        (x0, f0)
    }
}

impl GpModel {
    /// BLUP mean `mu + r' R^-1 (y - 1 mu)` and variance
    /// `sigma^2 (1 - r' R^-1 r)` clamped at zero.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let mut r: Vec<f64> = self.inputs.rows().map(|xi| correlation(&self.spec, x, xi)).collect();
        let mean = self.mu_hat + dot(&r, &self.weights);
        if self.sigma2_hat == 0.0 {
            return Prediction { mean, variance: 0.0 };
        }
        self.chol.forward_in_place(&mut r);
        let q = dot(&r, &r);
        let variance = (self.sigma2_hat * (1.0 - q)).max(0.0);
        Prediction { mean, variance }
    }

    /// Predictions at every row of `design`, in row order.
    pub fn predict_many(&self, design: &DesignMatrix) -> Vec<Prediction> {
        map_indices(design.n(), |i| self.predict(design.row(i)))
    }

    pub fn inputs(&self) -> &DesignMatrix {
        &self.inputs
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn spec(&self) -> &CorrelationSpec {
        &self.spec
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2_hat
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Profile log-likelihood of the standardized responses at the fitted
    /// decay rates (`+inf` for constant data).
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Lower-triangular factor of `R + nugget I`, row-major.
    pub fn cholesky_factor(&self) -> &[f64] {
        self.chol.factor_data()
    }

    pub fn to_record(&self) -> GpModelRecord {
        GpModelRecord {
            theta: self.spec.theta().to_vec(),
            p: self.spec.power().to_vec(),
            mu_hat: self.mu_hat,
            sigma2_hat: self.sigma2_hat,
            nugget: self.nugget,
            x: self.inputs.rows().map(|r| r.to_vec()).collect(),
            y: self.responses.clone(),
        }
    }

    /// Rebuilds a model from a snapshot, refactoring the correlation matrix
    /// with the recorded nugget.
    pub fn from_record(rec: &GpModelRecord) -> Result<Self, GpError> {
        let spec = CorrelationSpec::new(rec.p.clone(), rec.theta.clone())?;
        let d = spec.dim();
        let inputs = DesignMatrix::from_rows(d, &rec.x).map_err(|_| GpError::InvalidSpec("input rows must match theta length"))?;
        validate(&inputs, &rec.y)?;
        let dist = PowDistances::new(&inputs, spec.power());
        let r = dist.correlation_matrix(spec.theta(), rec.nugget);
        let chol = Cholesky::factor(&r, inputs.n()).ok_or(GpError::Fit { nugget: rec.nugget })?;
        debug_assert_eq!(chol.dim(), inputs.n());
        let resid: Vec<f64> = rec.y.iter().map(|v| v - rec.mu_hat).collect();
        let weights = chol.solve(&resid);
        let log_likelihood = match standardize(&rec.y) {
            Some((ys, _, _)) => profile_ll(&chol, &ys),
            None => f64::INFINITY,
        };
        Ok(Self {
            inputs,
            responses: rec.y.clone(),
            spec,
            mu_hat: rec.mu_hat,
            sigma2_hat: rec.sigma2_hat,
            nugget: rec.nugget,
            chol,
            weights,
            log_likelihood,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spec1(theta: f64) -> CorrelationSpec {
        CorrelationSpec::with_power(DEFAULT_POWER, vec![theta]).unwrap()
    }

    #[test]
    fn correlation_values() {
        let s = spec1(2.0);
        assert_eq!(correlation(&s, &[0.3], &[0.3]), 1.0);
        // exp(-2 * 0.5^1.95), 0.5^1.95 = 0.25881...
        let expected = (-2.0 * 0.5f64.powf(1.95)).exp();
        let c = correlation(&s, &[0.1], &[0.6]);
        assert!((c - expected).abs() < 1e-15);
        assert!((c - 0.5959).abs() < 1e-4);
        assert_eq!(correlation(&spec1(0.0), &[0.0], &[1.0]), 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(CorrelationSpec::new(vec![2.5], vec![1.0]).is_err());
        assert!(CorrelationSpec::new(vec![1.0], vec![-1.0]).is_err());
        assert!(CorrelationSpec::new(vec![1.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn constant_response_model() {
        let x = DesignMatrix::from_row_major(3, 1, vec![0.1, 0.5, 0.9]).unwrap();
        let m = fit_gp(&x, &[2.5, 2.5, 2.5], &FitConfig::default()).unwrap();
        assert_eq!(m.mu_hat(), 2.5);
        assert_eq!(m.sigma2_hat(), 0.0);
        for t in [0.0, 0.33, 1.0] {
            let p = m.predict(&[t]);
            assert_eq!(p.mean, 2.5);
            assert_eq!(p.variance, 0.0);
        }
    }

    #[test]
    fn two_point_closed_form() {
        // R = [[1+g, c], [c, 1+g]]; everything below is written out by hand.
        let theta = 3.0;
        let x = DesignMatrix::from_row_major(2, 1, vec![0.2, 0.7]).unwrap();
        let y = [1.0, 3.0];
        let cfg = FitConfig { fixed_theta: Some(vec![theta]), ..FitConfig::default() };
        let m = fit_gp(&x, &y, &cfg).unwrap();
        let g = m.nugget();
        let c = (-theta * 0.5f64.powf(1.95)).exp();
        let a = 1.0 + g;
        let det = a * a - c * c;
        // R^-1 = [[a, -c], [-c, a]] / det; 1'R^-1 = (a-c)/det * [1,1]
        let mu = (y[0] + y[1]) / 2.0;
        assert!((m.mu_hat() - mu).abs() < 1e-12);
        let e = [y[0] - mu, y[1] - mu];
        let rinv_e = [(a * e[0] - c * e[1]) / det, (-c * e[0] + a * e[1]) / det];
        let s2 = (e[0] * rinv_e[0] + e[1] * rinv_e[1]) / 2.0;
        assert!((m.sigma2_hat() - s2).abs() < 1e-10 * s2);
        let xs = 0.4;
        let r = [(-theta * (0.2f64).powf(1.95)).exp(), (-theta * (0.3f64).powf(1.95)).exp()];
        let mean = mu + r[0] * rinv_e[0] + r[1] * rinv_e[1];
        let rinv_r = [(a * r[0] - c * r[1]) / det, (-c * r[0] + a * r[1]) / det];
        let var = s2 * (1.0 - (r[0] * rinv_r[0] + r[1] * rinv_r[1]));
        let p = m.predict(&[xs]);
        assert!((p.mean - mean).abs() < 1e-10);
        assert!((p.variance - var).abs() < 1e-10 * s2);
    }

    #[test]
    fn prior_reversion_far_away() {
        let x = DesignMatrix::from_row_major(3, 1, vec![0.0, 0.05, 0.1]).unwrap();
        let cfg = FitConfig { fixed_theta: Some(vec![100.0]), ..FitConfig::default() };
        let m = fit_gp(&x, &[1.0, 2.0, 0.5], &cfg).unwrap();
        let p = m.predict(&[1.0]);
        assert!((p.mean - m.mu_hat()).abs() < 1e-12);
        assert!((p.variance - m.sigma2_hat()).abs() < 1e-12 * m.sigma2_hat());
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DesignMatrix::from_row_major(1, 1, vec![0.5]).unwrap();
        assert_eq!(fit_gp(&x, &[1.0], &FitConfig::default()).unwrap_err(), GpError::TooFewPoints(1));
        let x = DesignMatrix::from_row_major(2, 1, vec![0.1, 0.5]).unwrap();
        assert!(matches!(fit_gp(&x, &[1.0], &FitConfig::default()), Err(GpError::LengthMismatch { .. })));
        assert_eq!(fit_gp(&x, &[1.0, f64::NAN], &FitConfig::default()).unwrap_err(), GpError::NonFiniteResponse);
    }

    #[test]
    fn record_round_trip_preserves_predictions() {
        let x = DesignMatrix::from_row_major(4, 1, vec![0.1, 0.4, 0.6, 0.95]).unwrap();
        let m = fit_gp(&x, &[0.3, -1.0, 0.2, 2.0], &FitConfig::default()).unwrap();
        let back = GpModel::from_record(&m.to_record()).unwrap();
        for t in [0.0, 0.25, 0.77] {
            let (a, b) = (m.predict(&[t]), back.predict(&[t]));
            assert!((a.mean - b.mean).abs() < 1e-12);
            assert!((a.variance - b.variance).abs() < 1e-12);
        }
    }
}
