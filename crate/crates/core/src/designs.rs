//! Space-filling designs in the scaled unit hypercube.
//!
//! All Latin hypercube generators place each point uniformly at random inside
//! its stratum. The maximin and MaxPro variants start from [`random_lhd`] with
//! the same seed and improve it by column-swap simulated annealing; the best
//! design seen is returned, so the criterion never ends up worse than the
//! starting design.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{exp, ln, powf, sqrt};
use crate::rng::{derive_seed, rng_from_seed};

/// Default number of swap proposals for the optimized designs.
pub const DEFAULT_SWAP_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("design needs at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("design dimension must be positive")]
    ZeroDimension,
    #[error("design data has {len} values, expected {n} x {d}")]
    Shape { len: usize, n: usize, d: usize },
}

/// `n` points in `[0,1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_row_major(n: usize, d: usize, data: Vec<f64>) -> Result<Self, DesignError> {
        if d == 0 {
            return Err(DesignError::ZeroDimension);
        }
        if data.len() != n * d {
            return Err(DesignError::Shape { len: data.len(), n, d });
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(d: usize, rows: &[Vec<f64>]) -> Result<Self, DesignError> {
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(DesignError::Shape { len: r.len(), n: 1, d });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), d, data)
    }

    /// An empty design with `d` columns.
    pub fn empty(d: usize) -> Self {
        Self { n: 0, d, data: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn push_row(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.d, "row length must match design dimension");
        self.data.extend_from_slice(x);
        self.n += 1;
    }

    /// Appends all rows of `other`.
    pub fn extend(&mut self, other: &DesignMatrix) {
        assert_eq!(other.d, self.d);
        self.data.extend_from_slice(&other.data);
        self.n += other.n;
    }

    fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.d + k]
    }

    fn swap_in_column(&mut self, k: usize, i: usize, j: usize) {
        self.data.swap(i * self.d + k, j * self.d + k);
    }

    /// True when every coordinate lies in `[0,1]` and, in each dimension,
    /// the points occupy distinct strata `[i/n, (i+1)/n)`.
    pub fn is_latin_hypercube(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let n = self.n;
        (0..self.d).all(|k| {
            let mut seen = alloc::vec![false; n];
            (0..n).all(|i| {
                let x = self.get(i, k);
                if !(0.0..=1.0).contains(&x) {
                    return false;
                }
                let s = stratum(x, n);
                !core::mem::replace(&mut seen[s], true)
            })
        })
    }

    /// Minimum pairwise Euclidean distance (`+inf` for fewer than two points).
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d2 = sq_dist(self.row(i), self.row(j));
                if d2 < best {
                    best = d2;
                }
            }
        }
        sqrt(best)
    }

    /// MaxPro criterion
    /// `psi = [ C(n,2)^-1 sum_{i<j} 1 / prod_k (x_ik - x_jk)^2 ]^(1/d)`.
    /// Infinite when two points share a coordinate.
    pub fn maxpro_criterion(&self) -> f64 {
        exp(log_maxpro(self))
    }
}

fn stratum(x: f64, n: usize) -> usize {
    let s = (x * n as f64) as usize;
    s.min(n - 1)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dims(n: usize, d: usize, min_n: usize) -> Result<(), DesignError> {
    if d == 0 {
        return Err(DesignError::ZeroDimension);
    }
    if n < min_n {
        return Err(DesignError::TooFewPoints { n, min: min_n });
    }
    Ok(())
}

/// Random Latin hypercube design, reproducible for a fixed seed.
pub fn random_lhd(n: usize, d: usize, seed: u64) -> Result<DesignMatrix, DesignError> {
    check_dims(n, d, 1)?;
    let mut rng = rng_from_seed(seed);
    let mut data = alloc::vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    let nf = n as f64;
    for k in 0..d {
        perm.shuffle(&mut rng);
        for (i, &p) in perm.iter().enumerate() {
            let u: f64 = rng.gen();
            let mut x = (p as f64 + u) / nf;
            // rounding can push x onto the next stratum boundary
            if stratum(x, n) != p {
                x = p as f64 / nf;
            }
            data[i * d + k] = x;
        }
    }
    DesignMatrix::from_row_major(n, d, data)
}

/// Maximin Latin hypercube: maximizes the minimum pairwise distance.
///
/// Annealing runs on the Morris-Mitchell `phi_15` surrogate; the returned
/// design is the best visited one by (min distance, then `phi_15`).
pub fn maximin_lhd(n: usize, d: usize, seed: u64, iterations: usize) -> Result<DesignMatrix, DesignError> {
    check_dims(n, d, 2)?;
    let start = random_lhd(n, d, seed)?;
    let better = |a: (f64, f64), b: (f64, f64)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    Ok(anneal(
        start,
        derive_seed(seed, &[0x6d6d]),
        iterations,
        log_phi_p,
        |dm| (dm.min_distance(), log_phi_p(dm)),
        better,
    ))
}

/// Maximum projection Latin hypercube: minimizes [`DesignMatrix::maxpro_criterion`].
pub fn maxpro_lhd(n: usize, d: usize, seed: u64, iterations: usize) -> Result<DesignMatrix, DesignError> {
    check_dims(n, d, 2)?;
    let start = random_lhd(n, d, seed)?;
    Ok(anneal(
        start,
        derive_seed(seed, &[0x6d70]),
        iterations,
        log_maxpro,
        log_maxpro,
        |a: f64, b: f64| a < b,
    ))
}

const PHI_P: f64 = 15.0;

/// `ln phi_p` with `phi_p = (sum_{i<j} d_ij^-p)^(1/p)`, evaluated relative
/// to the minimum distance to stay in range.
fn log_phi_p(dm: &DesignMatrix) -> f64 {
    let mut dists = Vec::with_capacity(dm.n * (dm.n.saturating_sub(1)) / 2);
    for i in 0..dm.n {
        for j in (i + 1)..dm.n {
            dists.push(sqrt(sq_dist(dm.row(i), dm.row(j))));
        }
    }
    let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
    if dmin == 0.0 {
        return f64::INFINITY;
    }
    let s: f64 = dists.iter().map(|&x| powf(dmin / x, PHI_P)).sum();
    -ln(dmin) + ln(s) / PHI_P
}

fn log_maxpro(dm: &DesignMatrix) -> f64 {
    let n = dm.n;
    if n < 2 {
        return f64::NEG_INFINITY;
    }
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut t = 0.0;
            for k in 0..dm.d {
                let diff = dm.get(i, k) - dm.get(j, k);
                if diff == 0.0 {
                    return f64::INFINITY;
                }
                t -= 2.0 * ln(diff.abs());
            }
            terms.push(t);
        }
    }
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + ln(terms.iter().map(|&t| exp(t - m)).sum::<f64>());
    (lse - ln(terms.len() as f64)) / dm.d as f64
}

/// Column-swap simulated annealing on `energy` (lower is better). Returns the
/// best design under `better(score(a), score(b))`, starting from `start`.
fn anneal<S: Copy>(
    start: DesignMatrix,
    seed: u64,
    iterations: usize,
    energy: impl Fn(&DesignMatrix) -> f64,
    score: impl Fn(&DesignMatrix) -> S,
    better: impl Fn(S, S) -> bool,
) -> DesignMatrix {
    let n = start.n;
    let d = start.d;
    let mut rng = rng_from_seed(seed);
    let mut current = start.clone();
    let mut cur_e = energy(&current);
    let mut best = start;
    let mut best_s = score(&best);
    const T0: f64 = 0.1;
    const T_END: f64 = 1e-4;
    let cooling = if iterations > 1 {
        exp(ln(T_END / T0) / (iterations - 1) as f64)
    } else {
        1.0
    };
    let mut temp = T0;
    for _ in 0..iterations {
        let k = rng.gen_range(0..d);
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        current.swap_in_column(k, i, j);
        let e = energy(&current);
        let delta = e - cur_e;
        let u: f64 = rng.gen();
        if delta <= 0.0 || u < exp(-delta / temp) {
            cur_e = e;
            let s = score(&current);
            if better(s, best_s) {
                best_s = s;
                best = current.clone();
            }
        } else {
            current.swap_in_column(k, i, j);
        }
        temp *= cooling;
    }
    best
}
