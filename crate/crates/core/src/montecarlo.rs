//! Parallel Monte Carlo driver with per-trial random streams.
//!
//! Trial `i` always draws from stream `(seed, i)` and results come back in
//! trial order, so any reduction over them is independent of the number of
//! worker threads.

use rayon::prelude::*;

use crate::error::{GlbmError, Result};
use crate::rng::RngStream;
use crate::stats::{pairwise_sum, MeanSe};

/// Outcome of one trial: a value or the error it raised.
pub type TrialResult<R> = Result<R>;

/// Runs `trials` independent trials on `workers` threads (0 means the rayon
/// default) and returns their results in trial order.
pub fn parallel_mc<R, F>(seed: u64, trials: usize, workers: usize, f: F) -> Result<Vec<TrialResult<R>>>
where
    R: Send,
    F: Fn(usize, &mut RngStream) -> Result<R> + Sync + Send,
{
    let run = || -> Vec<TrialResult<R>> {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::for_trial(seed, i);
                f(i, &mut rng)
            })
            .collect()
    };
    if workers == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GlbmError::InvalidUsage(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(run))
}

/// Like [`parallel_mc`] but fails on the first trial error.
pub fn parallel_mc_all<R, F>(seed: u64, trials: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, &mut RngStream) -> Result<R> + Sync + Send,
{
    parallel_mc(seed, trials, workers, f)?.into_iter().collect()
}

/// Deterministic sum of successful scalar results and the count of failures.
pub fn reduce_sum(results: &[TrialResult<f64>]) -> (f64, usize) {
    let ok: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    (pairwise_sum(&ok), results.len() - ok.len())
}

/// Mean and standard error of successful scalar results and the count of
/// failures.
pub fn reduce_mean(results: &[TrialResult<f64>]) -> (MeanSe, usize) {
    let ok: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failed = results.len() - ok.len();
    (MeanSe::from_slice(&ok), failed)
}
