//! Multi-threaded crisis-probability estimates.
//!
//! Work is split over run indices and grid points; results are collected in
//! index order, so the output does not depend on the number of workers.

use rayon::prelude::*;

use keenjump_core::montecarlo::{
    check_point, run_outcome, with_field, CrisisCriterion, McResult, PointError, RunOutcome,
};
use keenjump_core::{ModelParams, SimConfig};

/// Environment variable that sets the number of worker threads.
pub const WORKERS_ENV: &str = "KEENJUMP_WORKERS";

/// Worker count from [`WORKERS_ENV`], falling back to the machine's
/// available parallelism.
pub fn worker_count() -> Result<usize, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn thread_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Crisis-probability estimate over run indices `0..n_runs`, on the current
/// rayon pool.
pub fn estimate(
    point: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Result<McResult, PointError> {
    check_point(point, cfg, n_runs)?;
    let outcomes: Vec<RunOutcome> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_outcome(point, cfg, c, i))
        .collect::<Result<_, _>>()
        .map_err(PointError::Config)?;
    Ok(McResult::from_outcomes(*point, &outcomes))
}

pub fn sweep_1d(
    name: &str,
    values: &[f64],
    base: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Vec<Result<McResult, PointError>> {
    values
        .par_iter()
        .map(|&v| with_field(base, name, v).and_then(|p| estimate(&p, cfg, c, n_runs)))
        .collect()
}

/// Row-major grid over `(p1, p2)` with `p1` as the outer index.
#[allow(clippy::too_many_arguments)]
pub fn sweep_2d(
    p1_name: &str,
    p1_values: &[f64],
    p2_name: &str,
    p2_values: &[f64],
    base: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Vec<Result<McResult, PointError>> {
    let cells: Vec<(f64, f64)> = p1_values
        .iter()
        .flat_map(|&a| p2_values.iter().map(move |&b| (a, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(a, b)| {
            with_field(base, p1_name, a)
                .and_then(|p| with_field(&p, p2_name, b))
                .and_then(|p| estimate(&p, cfg, c, n_runs))
        })
        .collect()
}
