//! Thin wrappers over `libm` so results do not depend on the platform libm.

pub(crate) use libm::{cos, erfc, exp, fabs as abs, log as ln, pow as powf, sqrt};

pub(crate) const SQRT_2: f64 = core::f64::consts::SQRT_2;
/// 1 / sqrt(2 pi)
pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub(crate) fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal distribution function.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `Phi(hi) - Phi(lo)` without cancellation when both bounds sit in the same tail.
pub(crate) fn norm_interval(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        // upper tail: 1 - Phi(x) = Phi(-x)
        norm_cdf(-lo) - norm_cdf(-hi)
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    }
}
