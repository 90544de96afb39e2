//! Goodness of fit between a simulated series and the target.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{ln, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} points, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("predicted series is constant; R^2 is undefined")]
    ConstantPredictor,
    #[error("target series is constant; normalized discrepancy is undefined")]
    ConstantTarget,
}

fn check(a: &[f64], b: &[f64], need: usize) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < need {
        return Err(MetricsError::TooShort { need, got: a.len() });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn rmse(g_hat: &[f64], g0: &[f64]) -> Result<f64, MetricsError> {
    check(g_hat, g0, 1)?;
    let ss: f64 = g_hat.iter().zip(g0).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sqrt(ss / g0.len() as f64))
}

/// R^2 of regressing `g0` on `g_hat` with intercept and slope, i.e. the
/// squared sample correlation.
pub fn r_squared(g_hat: &[f64], g0: &[f64]) -> Result<f64, MetricsError> {
    check(g_hat, g0, 3)?;
    let (mx, my) = (mean(g_hat), mean(g0));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in g_hat.iter().zip(g0) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if !(sxx > 0.0) {
        return Err(MetricsError::ConstantPredictor);
    }
    if !(syy > 0.0) {
        // constant target: a constant fit explains it exactly
        return Ok(1.0);
    }
    Ok(((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0))
}

/// Normalized discrepancy `||g0 - g_hat||^2 / ||g0 - mean(g0)||^2` and its
/// natural log (`None` when the ratio is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormD {
    pub ratio: f64,
    pub log: Option<f64>,
}

pub fn norm_d(g_hat: &[f64], g0: &[f64]) -> Result<NormD, MetricsError> {
    check(g_hat, g0, 1)?;
    let m = mean(g0);
    let den: f64 = g0.iter().map(|y| (y - m) * (y - m)).sum();
    if !(den > 0.0) {
        return Err(MetricsError::ConstantTarget);
    }
    let num: f64 = g_hat.iter().zip(g0).map(|(a, b)| (b - a) * (b - a)).sum();
    let ratio = num / den;
    Ok(NormD { ratio, log: (ratio > 0.0).then(|| ln(ratio)) })
}

/// Nash-Sutcliffe efficiency, `1 - ratio`.
pub fn nash_sutcliffe(g_hat: &[f64], g0: &[f64]) -> Result<f64, MetricsError> {
    Ok(1.0 - norm_d(g_hat, g0)?.ratio)
}

/// All metrics for one solution series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetrics {
    pub rmse: f64,
    /// `None` when the solution series is constant.
    pub r2: Option<f64>,
    pub normd_ratio: f64,
    pub normd_log: Option<f64>,
    pub nse: f64,
}

impl SeriesMetrics {
    pub fn compute(g_hat: &[f64], g0: &[f64]) -> Result<Self, MetricsError> {
        let nd = norm_d(g_hat, g0)?;
        let r2 = match r_squared(g_hat, g0) {
            Ok(v) => Some(v),
            Err(MetricsError::ConstantPredictor) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { rmse: rmse(g_hat, g0)?, r2, normd_ratio: nd.ratio, normd_log: nd.log, nse: 1.0 - nd.ratio })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn rmse_cases() {
        let a = [1.0, -2.0, 3.5];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v - 0.75).collect();
        assert!((rmse(&shifted, &a).unwrap() - 0.75).abs() < 1e-15);
        assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((2.5f64.sqrt() - 1.5811).abs() < 1e-4);
        assert_eq!(rmse(&[1.0], &[1.0, 2.0]), Err(MetricsError::LengthMismatch(1, 2)));
    }

    #[test]
    fn r_squared_cases() {
        let x = [0.5, 1.0, 2.5, -1.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((r_squared(&x, &y).unwrap() - 1.0).abs() < 1e-14);
        // y orthogonal to centered x
        let x = [-1.0, 0.0, 1.0];
        let y = [1.0, -2.0, 1.0];
        assert!(r_squared(&x, &y).unwrap().abs() < 1e-15);
        assert_eq!(r_squared(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]), Err(MetricsError::ConstantPredictor));
    }

    #[test]
    fn norm_d_cases() {
        let g0 = [1.0, 3.0, 2.0, 6.0];
        let flat = [3.0; 4];
        let nd = norm_d(&flat, &g0).unwrap();
        assert!((nd.ratio - 1.0).abs() < 1e-15);
        assert!(nd.log.unwrap().abs() < 1e-15);
        assert!(nash_sutcliffe(&flat, &g0).unwrap().abs() < 1e-15);
        let perfect = norm_d(&g0, &g0).unwrap();
        assert_eq!(perfect.ratio, 0.0);
        assert_eq!(perfect.log, None);
        assert_eq!(nash_sutcliffe(&g0, &g0).unwrap(), 1.0);
        assert_eq!(norm_d(&g0, &[2.0; 4]), Err(MetricsError::ConstantTarget));
    }
}
