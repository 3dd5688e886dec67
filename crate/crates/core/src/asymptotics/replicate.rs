//! Deterministic parallel replication.
//!
//! Replication `i` draws from `stream(seed, i)`. Replications are grouped in
//! fixed chunks of [`CHUNK`]; each chunk is reduced with compensated sums and
//! the chunk results are folded in index order. The partition does not depend
//! on the worker count, so results are bit-identical for any `workers`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::rng::{stream, Stream};

pub const CHUNK: u64 = 4096;

/// Replication budget and parallelism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct McConfig {
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self { reps, seed, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
    }
}

/// Sums and cross-products of `K` per-replication observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<const K: usize> {
    pub count: u64,
    sum: [NeumaierSum<f64>; K],
    cross: [[NeumaierSum<f64>; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self { count: 0, sum: [NeumaierSum::new(); K], cross: [[NeumaierSum::new(); K]; K] }
    }
}

impl<const K: usize> Moments<K> {
    pub fn push(&mut self, x: [f64; K]) {
        self.count += 1;
        for i in 0..K {
            self.sum[i].add(x[i]);
            for j in i..K {
                self.cross[i][j].add(x[i] * x[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for i in 0..K {
            self.sum[i].merge(&other.sum[i]);
            for j in i..K {
                self.cross[i][j].merge(&other.cross[i][j]);
            }
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i].value() / self.count as f64
    }

    /// Unbiased sample covariance of observables `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        let c = (self.cross[i][j].value() - n * self.mean(i) * self.mean(j)) / (n - 1.0);
        if i == j {
            c.max(0.0)
        } else {
            c
        }
    }

    /// Standard error of `mean(i)`.
    pub fn std_error(&self, i: usize) -> f64 {
        (self.cov(i, i) / self.count as f64).sqrt()
    }
}

/// Runs `f(stream, index)` for every replication and reduces the results.
pub fn replicate<const K: usize, F>(mc: &McConfig, f: F) -> Result<Moments<K>>
where
    F: Fn(&mut Stream, u64) -> Result<[f64; K]> + Sync,
{
    if mc.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let chunks = mc.reps.div_ceil(CHUNK);
    let parts: Vec<Result<Moments<K>>> = mc.pool()?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut m = Moments::default();
                for i in c * CHUNK..((c + 1) * CHUNK).min(mc.reps) {
                    m.push(f(&mut stream(mc.seed, i), i)?);
                }
                Ok(m)
            })
            .collect()
    });
    let mut total = Moments::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Runs `f(stream, index)` for every replication and keeps the outputs in
/// index order.
pub fn collect<T: Send, F>(mc: &McConfig, f: F) -> Result<Vec<T>>
where
    F: Fn(&mut Stream, u64) -> Result<T> + Sync,
{
    mc.pool()?.install(|| (0..mc.reps).into_par_iter().map(|i| f(&mut stream(mc.seed, i), i)).collect())
}
