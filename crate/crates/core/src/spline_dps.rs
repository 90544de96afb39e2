//! Discretization-point-set construction by greedy cubic-spline knot selection.
//!
//! The target series is fitted by least squares on a cubic B-spline basis
//! with boundary knots at the first and last time point. Knots are added one
//! at a time, each at the time index that minimizes the resulting mean squared
//! error with the earlier knots held fixed. The DPS size is read off the
//! MSE-versus-knots path with an elbow rule.
//!
//! Time indices are 1-based throughout (`1..=L`), interior indices are
//! `2..=L-1`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::sqrt;

/// Smallest supported series length.
pub const MIN_SERIES_LEN: usize = 5;
/// Knots explored by default.
pub const DEFAULT_K_MAX: usize = 10;
/// Ridge added to the normal equations when the basis is rank deficient.
pub const RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("series has {0} points, need at least {MIN_SERIES_LEN}")]
    TooShort(usize),
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("time grid must be strictly increasing (index {0})")]
    TimesNotIncreasing(usize),
    #[error("knot index {0} is not an interior time index")]
    InvalidKnot(usize),
    #[error("duplicate knot index {0}")]
    DuplicateKnot(usize),
    #[error("{knots} knots requested, at most {max} allowed for this series")]
    TooManyKnots { knots: usize, max: usize },
}

/// A target response on a fixed time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TargetSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, SplineError> {
        if times.len() != values.len() {
            return Err(SplineError::LengthMismatch { times: times.len(), values: values.len() });
        }
        if values.len() < MIN_SERIES_LEN {
            return Err(SplineError::TooShort(values.len()));
        }
        if let Some(i) = values.iter().chain(&times).position(|v| !v.is_finite()) {
            return Err(SplineError::NonFinite(i % values.len() + 1));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SplineError::TimesNotIncreasing(i + 2));
        }
        Ok(Self { times, values })
    }

    /// Values on the index grid `1..=L`.
    pub fn from_values(values: Vec<f64>) -> Result<Self, SplineError> {
        let times = (1..=values.len()).map(|i| i as f64).collect();
        Self::new(times, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a 1-based time index.
    pub fn value_at(&self, index: usize) -> f64 {
        self.values[index - 1]
    }

    /// Physical time at a 1-based time index.
    pub fn time_at(&self, index: usize) -> f64 {
        self.times[index - 1]
    }

    /// Largest number of interior knots a fit may use.
    pub fn max_knots(&self) -> usize {
        self.len() - MIN_SERIES_LEN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit {
    pub fitted: Vec<f64>,
    pub mse: f64,
    /// The normal equations needed the ridge to be solvable.
    pub ridged: bool,
}

/// The cubic B-spline design matrix on `times` for the given interior knot
/// indices: `L` rows of `knots + 4` columns, row-major. Its column space
/// equals intercept plus the usual `degree = 3` basis without its first column.
pub fn cubic_bspline_basis(times: &[f64], interior_knots: &[usize]) -> (usize, Vec<f64>) {
    let knots = knot_vector(times, interior_knots);
    let ncols = interior_knots.len() + 4;
    let mut out = alloc::vec![0.0; times.len() * ncols];
    for (j, &t) in times.iter().enumerate() {
        let (first, vals) = nonzero_basis(&knots, t);
        out[j * ncols + first..j * ncols + first + 4].copy_from_slice(&vals);
    }
    (ncols, out)
}

fn knot_vector(times: &[f64], interior_knots: &[usize]) -> Vec<f64> {
    let (a, b) = (times[0], times[times.len() - 1]);
    let mut inner: Vec<f64> = interior_knots.iter().map(|&i| times[i - 1]).collect();
    inner.sort_by(f64::total_cmp);
    let mut knots = Vec::with_capacity(inner.len() + 8);
    knots.extend_from_slice(&[a; 4]);
    knots.extend_from_slice(&inner);
    knots.extend_from_slice(&[b; 4]);
    knots
}

/// Index of the first nonzero cubic basis function at `t` and the four values
/// (Cox-de Boor). The right boundary belongs to the last span.
fn nonzero_basis(knots: &[f64], t: f64) -> (usize, [f64; 4]) {
    let nbasis = knots.len() - 4;
    // span mu with knots[mu] <= t < knots[mu+1], mu in 3..nbasis
    let mut mu = 3;
    while mu + 1 < nbasis && knots[mu + 1] <= t {
        mu += 1;
    }
    let mut n = [0.0f64; 4];
    n[0] = 1.0;
    let mut left = [0.0f64; 4];
    let mut right = [0.0f64; 4];
    for j in 1..=3 {
        left[j] = t - knots[mu + 1 - j];
        right[j] = knots[mu + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { n[r] / denom } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    (mu - 3, n)
}

fn check_knots(series: &TargetSeries, knots: &[usize]) -> Result<(), SplineError> {
    let l = series.len();
    if knots.len() > series.max_knots() {
        return Err(SplineError::TooManyKnots { knots: knots.len(), max: series.max_knots() });
    }
    let mut seen = Vec::with_capacity(knots.len());
    for &k in knots {
        if k < 2 || k >= l {
            return Err(SplineError::InvalidKnot(k));
        }
        if seen.contains(&k) {
            return Err(SplineError::DuplicateKnot(k));
        }
        seen.push(k);
    }
    Ok(())
}

/// Least-squares cubic spline fit of the series with the given interior knots.
pub fn fit_cubic_spline(series: &TargetSeries, interior_knots: &[usize]) -> Result<SplineFit, SplineError> {
    check_knots(series, interior_knots)?;
    Ok(fit_unchecked(series, interior_knots))
}

/// Fit via banded normal equations (bandwidth 3); each row has four nonzeros.
fn fit_unchecked(series: &TargetSeries, interior_knots: &[usize]) -> SplineFit {
    let times = series.times();
    let y = series.values();
    let knots = knot_vector(times, interior_knots);
    let p = interior_knots.len() + 4;
    const BW: usize = 4; // diagonal plus three sub-diagonals
    // lower band storage: gram[i][k] = G[i][i-k]
    let mut gram = alloc::vec![[0.0f64; BW]; p];
    let mut rhs = alloc::vec![0.0f64; p];
    let mut rows = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let (first, vals) = nonzero_basis(&knots, t);
        for a in 0..4 {
            rhs[first + a] += vals[a] * y[j];
            for b in 0..=a {
                gram[first + a][a - b] += vals[a] * vals[b];
            }
        }
        rows.push((first, vals));
    }
    let (coef, ridged) = match band_solve(&gram, &rhs) {
        Some(c) => (c, false),
        None => {
            let scale = gram.iter().map(|r| r[0]).fold(0.0, f64::max).max(1.0);
            for r in gram.iter_mut() {
                r[0] += RIDGE * scale;
            }
            (band_solve(&gram, &rhs).unwrap_or_else(|| alloc::vec![0.0; p]), true)
        }
    };
    let fitted: Vec<f64> = rows
        .iter()
        .map(|(first, vals)| (0..4).map(|a| vals[a] * coef[first + a]).sum())
        .collect();
    let mse = fitted.iter().zip(y).map(|(f, v)| (v - f) * (v - f)).sum::<f64>() / y.len() as f64;
    SplineFit { fitted, mse, ridged }
}

/// Banded Cholesky solve. Rejects pivots that are not safely positive.
fn band_solve(gram: &[[f64; 4]], rhs: &[f64]) -> Option<Vec<f64>> {
    let p = gram.len();
    let mut l = alloc::vec![[0.0f64; 4]; p];
    let max_diag = gram.iter().map(|r| r[0]).fold(0.0, f64::max);
    for i in 0..p {
        for k in (0..4).rev() {
            if k > i {
                continue;
            }
            let j = i - k;
            // G[i][j] - sum_m L[i][m] L[j][m], m ranges over the shared band
            let mut s = gram[i][k];
            for m in j.saturating_sub(3)..j {
                if i - m < 4 {
                    s -= l[i][i - m] * l[j][j - m];
                }
            }
            if k == 0 {
                if !(s > 1e-13 * max_diag) {
                    return None;
                }
                l[i][0] = sqrt(s);
            } else {
                l[i][k] = s / l[j][0];
            }
        }
    }
    let mut z = rhs.to_vec();
    for i in 0..p {
        let mut s = z[i];
        for k in 1..4.min(i + 1) {
            s -= l[i][k] * z[i - k];
        }
        z[i] = s / l[i][0];
    }
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in 1..4 {
            if i + k < p {
                s -= l[i + k][k] * z[i + k];
            }
        }
        z[i] = s / l[i][0];
    }
    Some(z)
}

/// Greedy forward knot search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotPath {
    /// Time indices in selection order.
    pub ordered_knots: Vec<usize>,
    /// MSE after 0, 1, ..., k_max knots.
    pub mse_path: Vec<f64>,
}

/// Adds `k_max` knots one at a time, each at the admissible interior index
/// minimizing the MSE given the earlier knots. Ties go to the smallest index.
pub fn greedy_knot_search(series: &TargetSeries, k_max: usize) -> Result<KnotPath, SplineError> {
    if k_max == 0 || k_max > series.max_knots() {
        return Err(SplineError::TooManyKnots { knots: k_max, max: series.max_knots() });
    }
    let l = series.len();
    let mut knots: Vec<usize> = Vec::with_capacity(k_max);
    let mut mse_path = Vec::with_capacity(k_max + 1);
    mse_path.push(fit_unchecked(series, &[]).mse);
    for _ in 0..k_max {
        let candidates: Vec<usize> = (2..l).filter(|c| !knots.contains(c)).collect();
        let scores = crate::par::map_indices(candidates.len(), |i| {
            let mut trial = knots.clone();
            trial.push(candidates[i]);
            fit_unchecked(series, &trial).mse
        });
        let mut best = 0;
        for (i, &m) in scores.iter().enumerate() {
            if m < scores[best] {
                best = i;
            }
        }
        knots.push(candidates[best]);
        // earlier knots stay, so the best fit can only improve; guard rounding
        let prev = *mse_path.last().expect("nonempty");
        mse_path.push(scores[best].min(prev));
    }
    Ok(KnotPath { ordered_knots: knots, mse_path })
}

/// How the DPS size is read off the MSE path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElbowRule {
    /// Knee of the normalized MSE curve over 1..k_max knots: the point
    /// farthest below the chord joining its first and last points.
    #[default]
    Chord,
    /// First `j >= 1` where `m[j-1] - 2 m[j] + m[j+1] > 0` on the path that
    /// starts at zero knots.
    SecondDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElbowChoice {
    pub k: usize,
    /// No elbow was found; `k` fell back to `k_max`.
    pub fallback: bool,
}

/// Picks the DPS size from an MSE path (entry `i` = MSE with `i` knots).
pub fn select_k_elbow(mse_path: &[f64], rule: ElbowRule) -> ElbowChoice {
    let k_max = mse_path.len().saturating_sub(1);
    let fallback = ElbowChoice { k: k_max, fallback: true };
    match rule {
        ElbowRule::SecondDifference => (1..mse_path.len().saturating_sub(1))
            .find(|&j| mse_path[j - 1] - 2.0 * mse_path[j] + mse_path[j + 1] > 0.0)
            .map_or(fallback, |k| ElbowChoice { k, fallback: false }),
        ElbowRule::Chord => {
            let m = &mse_path[1.min(mse_path.len())..];
            if m.len() < 3 {
                return fallback;
            }
            let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
            if !(hi > lo) {
                return fallback;
            }
            let last = (m.len() - 1) as f64;
            let mut best = (0usize, 0.0f64);
            for (i, &v) in m.iter().enumerate() {
                let x = i as f64 / last;
                let y = (v - lo) / (hi - lo);
                // normalized chord from (0, y0) to (1, y_end)
                let y0 = (m[0] - lo) / (hi - lo);
                let y1 = (m[m.len() - 1] - lo) / (hi - lo);
                let gap = y0 + (y1 - y0) * x - y;
                if gap > best.1 {
                    best = (i, gap);
                }
            }
            if best.1 <= 1e-12 {
                fallback
            } else {
                ElbowChoice { k: best.0 + 1, fallback: false }
            }
        }
    }
}

/// The discretization-point-set and the path it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpsResult {
    pub ordered_knots: Vec<usize>,
    pub mse_path: Vec<f64>,
    pub k_selected: usize,
    pub dps: Vec<usize>,
    pub rule: ElbowRule,
    /// The elbow rule found no elbow and `k_selected = k_max`.
    pub elbow_fallback: bool,
}

impl DpsResult {
    /// A DPS given explicitly, with no knot path behind it.
    pub fn fixed(dps: Vec<usize>) -> Self {
        Self {
            ordered_knots: dps.clone(),
            mse_path: Vec::new(),
            k_selected: dps.len(),
            dps,
            rule: ElbowRule::default(),
            elbow_fallback: false,
        }
    }
}

pub fn build_dps(series: &TargetSeries, k_max: usize) -> Result<DpsResult, SplineError> {
    build_dps_with(series, k_max, ElbowRule::default())
}

pub fn build_dps_with(series: &TargetSeries, k_max: usize, rule: ElbowRule) -> Result<DpsResult, SplineError> {
    let path = greedy_knot_search(series, k_max)?;
    let choice = select_k_elbow(&path.mse_path, rule);
    let k = choice.k.clamp(1, k_max);
    Ok(DpsResult {
        dps: path.ordered_knots[..k].to_vec(),
        ordered_knots: path.ordered_knots,
        mse_path: path.mse_path,
        k_selected: k,
        rule,
        elbow_fallback: choice.fallback,
    })
}
