//! Small dense routines for symmetric positive definite systems.

use alloc::vec::Vec;

use crate::math::{ln, sqrt};

/// Lower-triangular Cholesky factor stored row-major in an `n*n` buffer.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes the row-major symmetric matrix `a`. Returns `None` when a
    /// pivot is not strictly positive (the matrix is not numerically SPD).
    pub(crate) fn factor(a: &[f64], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = alloc::vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = sqrt(d);
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn factor_data(&self) -> &[f64] {
        &self.l
    }

    /// log det(A) = 2 sum log L_ii
    pub(crate) fn log_det(&self) -> f64 {
        (0..self.n).map(|i| 2.0 * ln(self.l[i * self.n + i])).sum()
    }

    /// Solves `L z = b` in place.
    pub(crate) fn forward_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, z)| l * z).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solves `L^T z = b` in place.
    pub(crate) fn backward_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `A z = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        self.forward_in_place(&mut z);
        self.backward_in_place(&mut z);
        z
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
