//! Runtime sweep over `(m, n)` grids.
//!
//! For every pair, `trials` instances are drawn with seeds
//! `seed, seed + 1, ...` and solved; only the solve pipeline (candidate
//! generation, envelopes, scan, recovery) is timed, on a monotonic clock.

use std::time::Instant;

use serde::Serialize;

use crate::instances::{generate, CapacityRule, GenSpec, InstanceError};
use crate::solver::{solve_with, SolveError, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub gamma: f64,
    pub v0: f64,
    pub capacity: CapacityRule,
    pub options: SolveOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            m_list: vec![100],
            n_list: vec![10],
            trials: 10,
            seed: 0,
            gamma: 0.5,
            v0: 1.0,
            capacity: CapacityRule::HalfN,
            options: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    #[serde(rename = "mean_s")]
    pub mean_seconds: f64,
    #[serde(rename = "min_s")]
    pub min_seconds: f64,
    #[serde(rename = "max_s")]
    pub max_seconds: f64,
    #[serde(rename = "z_mean")]
    pub z_star_mean: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("solve failed at m = {m}, n = {n}, seed = {seed}")]
    Solve {
        m: usize,
        n: usize,
        seed: u64,
        #[source]
        source: SolveError,
    },
}

/// Times one `(m, n)` cell.
pub fn bench_cell(config: &BenchConfig, m: usize, n: usize) -> Result<BenchResult, BenchError> {
    if config.trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let mut times = Vec::with_capacity(config.trials);
    let mut z_sum = 0.0;
    for t in 0..config.trials {
        let seed = config.seed.wrapping_add(t as u64);
        let instance = generate(&GenSpec {
            m,
            n,
            seed,
            gamma: config.gamma,
            v0: config.v0,
            capacity: config.capacity.clone(),
            ..GenSpec::default()
        })?;
        let start = Instant::now();
        let solution = solve_with(&instance, &config.options)
            .map_err(|source| BenchError::Solve { m, n, seed, source })?;
        times.push(start.elapsed().as_secs_f64());
        z_sum += solution.z_star;
    }
    let trials = times.len();
    Ok(BenchResult {
        m,
        n,
        trials,
        mean_seconds: times.iter().sum::<f64>() / trials as f64,
        min_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
        max_seconds: times.iter().copied().fold(0.0, f64::max),
        z_star_mean: z_sum / trials as f64,
    })
}

/// Runs every cell, `m` outer and `n` inner, calling `on_row` as each
/// finishes.
pub fn run_bench(
    config: &BenchConfig,
    mut on_row: impl FnMut(&BenchResult),
) -> Result<Vec<BenchResult>, BenchError> {
    let mut rows = Vec::new();
    for &m in &config.m_list {
        for &n in &config.n_list {
            let row = bench_cell(config, m, n)?;
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}
