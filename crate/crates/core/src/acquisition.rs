//! Contour expected improvement and history-matching implausibility.

use serde::{Deserialize, Serialize};

use crate::gp::Prediction;
use crate::math::{abs, norm_interval, norm_pdf, sqrt};

/// Default credibility multiplier (50% normal band).
pub const DEFAULT_ALPHA: f64 = 0.67;
/// Predictive standard deviations below this are treated as zero.
pub const SD_FLOOR: f64 = 1e-12;

/// A scalar contour level `a` and the band multiplier `alpha`
/// (`epsilon(x) = alpha * s(x)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourTarget {
    pub level: f64,
    pub alpha: f64,
}

impl ContourTarget {
    pub fn new(level: f64, alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        Self { level, alpha }
    }
}

/// Realized improvement `eps^2 - min((y - a)^2, eps^2)` with `eps = alpha * sd`.
pub fn improvement(y: f64, sd: f64, target: ContourTarget) -> f64 {
    let eps2 = (target.alpha * sd) * (target.alpha * sd);
    let dev2 = (y - target.level) * (y - target.level);
    eps2 - dev2.min(eps2)
}

/// Expected improvement for contour estimation when `y ~ N(mean, sd^2)`.
///
/// With `delta = mean - a`, `u1 = (-delta - eps)/sd`, `u2 = (-delta + eps)/sd`:
///
/// `E[I] = (eps^2 - delta^2) [Phi(u2) - Phi(u1)]
///        + sd^2 [(u2 phi(u2) - u1 phi(u1)) - (Phi(u2) - Phi(u1))]
///        + 2 delta sd [phi(u2) - phi(u1)]`
///
/// The second term is a difference. A variant of this expression that
/// multiplies the two brackets in the `sd^2` term does not agree with the
/// expectation by simulation and is not used.
pub fn expected_improvement(mean: f64, sd: f64, target: ContourTarget) -> f64 {
    if !(sd > 0.0) {
        return 0.0;
    }
    // EI(mean, sd, a) = sd^2 EI(z, 1, 0) with z = (mean - a)/sd
    let z = (mean - target.level) / sd;
    sd * sd * standard_ei(z, target.alpha)
}

/// EI for `Y ~ N(z, 1)`, contour level 0, band `alpha`.
fn standard_ei(z: f64, alpha: f64) -> f64 {
    if !z.is_finite() {
        return 0.0;
    }
    let u1 = -z - alpha;
    let u2 = -z + alpha;
    let mass = norm_interval(u1, u2);
    if mass == 0.0 {
        return 0.0;
    }
    let (p1, p2) = (norm_pdf(u1), norm_pdf(u2));
    let ei = (alpha * alpha - z * z) * mass + ((u2 * p2 - u1 * p1) - mass) + 2.0 * z * (p2 - p1);
    ei.max(0.0)
}

/// `|g_hat - target| / sd`. Below [`SD_FLOOR`] the ratio is 0 for an exact
/// match and `+inf` otherwise.
pub fn implausibility(pred_mean: f64, pred_sd: f64, target: f64) -> f64 {
    let num = abs(pred_mean - target);
    if pred_sd < SD_FLOOR {
        if num < SD_FLOOR {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / pred_sd
    }
}

/// Largest implausibility over aligned (prediction, target) pairs.
pub fn implausibility_max<'a>(pairs: impl IntoIterator<Item = (&'a Prediction, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(p, t)| implausibility(p.mean, sqrt(p.variance), t))
        .fold(0.0, f64::max)
}

/// Index of the largest value; the smallest index wins ties. NaNs are skipped.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}
