//! Iterations-to-solution statistics.
//!
//! `its99(t, theta) = t * ln(0.01) / ln(1 - theta)` is the number of
//! iterations needed, by repeating trials of length `t` that succeed with
//! probability `theta`, to see at least one success with 99 % probability.
//! The optimized figure scans `t` over the observed solve lengths.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::walksat::{solver_rng, TrialResult};

/// Target probability of at least one success.
pub const TARGET: f64 = 0.99;
pub const DEFAULT_MIN_SUCCESSES: usize = 10;
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no successful trials; iterations to solution undefined")]
    Unsolved,
    #[error("success probability {0} outside (0, 1]")]
    Probability(f64),
    #[error("no trials to aggregate")]
    NoTrials,
    #[error("empty noise grid")]
    EmptyGrid,
}

pub fn its99(iter: f64, theta: f64) -> Result<f64, MetricsError> {
    if theta.is_nan() || theta > 1.0 {
        return Err(MetricsError::Probability(theta));
    }
    if theta <= 0.0 {
        return Err(MetricsError::Unsolved);
    }
    if theta == 1.0 {
        return Ok(iter);
    }
    // written as ln(1 - TARGET) so that theta == TARGET gives exactly `iter`
    Ok(iter * (1.0 - TARGET).ln() / (1.0 - theta).ln())
}

/// Solve flag and flip count of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub solved: bool,
    pub iterations: u64,
}

impl From<&TrialResult> for Outcome {
    fn from(t: &TrialResult) -> Self {
        Outcome {
            solved: t.solved,
            iterations: t.iterations,
        }
    }
}

/// Empirical CDF of solve lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessCurve {
    /// Distinct solve lengths plus the longest trial, ascending.
    pub grid: Vec<u64>,
    /// Trials solved within `grid[i]` flips.
    pub successes: Vec<usize>,
    pub n_trials: usize,
}

impl SuccessCurve {
    pub fn theta(&self, i: usize) -> f64 {
        self.successes[i] as f64 / self.n_trials as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.theta(i)).collect()
    }

    pub fn is_unsolved(&self) -> bool {
        self.successes.last().is_none_or(|&s| s == 0)
    }

    pub fn n_solved(&self) -> usize {
        self.successes.last().copied().unwrap_or(0)
    }
}

pub fn success_curve(trials: &[TrialResult]) -> Result<SuccessCurve, MetricsError> {
    let outcomes: Vec<Outcome> = trials.iter().map(Outcome::from).collect();
    success_curve_of(&outcomes)
}

pub fn success_curve_of(outcomes: &[Outcome]) -> Result<SuccessCurve, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::NoTrials);
    }
    let mut solved: Vec<u64> = outcomes
        .iter()
        .filter(|o| o.solved)
        .map(|o| o.iterations)
        .collect();
    solved.sort_unstable();
    let longest = outcomes.iter().map(|o| o.iterations).max().unwrap();
    let mut grid = solved.clone();
    grid.push(longest);
    grid.dedup();
    let successes = grid
        .iter()
        .map(|&t| solved.partition_point(|&s| s <= t))
        .collect();
    Ok(SuccessCurve {
        grid,
        successes,
        n_trials: outcomes.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItsEstimate {
    pub its99_opt: f64,
    pub argmin_iter: u64,
    pub stderr: f64,
    pub n_success: usize,
}

/// Minimum of `its99` over grid points with at least `min_successes`
/// successes; returns `(value, grid index)`.
pub fn its99_min(curve: &SuccessCurve, min_successes: usize) -> Result<(f64, usize), MetricsError> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..curve.grid.len() {
        let s = curve.successes[i];
        if s == 0 || s < min_successes {
            continue;
        }
        let v = its99(curve.grid[i] as f64, curve.theta(i))?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    best.ok_or(MetricsError::Unsolved)
}

/// Optimized ITS99 with a bootstrap standard error over `resamples` resamples
/// of the trial set, each drawn from its own seed derived from `seed`.
pub fn its99_opt(
    outcomes: &[Outcome],
    min_successes: usize,
    resamples: usize,
    seed: u64,
) -> Result<ItsEstimate, MetricsError> {
    let curve = success_curve_of(outcomes)?;
    let (value, i) = its99_min(&curve, min_successes)?;
    let boot: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = solver_rng(seed ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let sample: Vec<Outcome> = (0..outcomes.len())
                .map(|_| outcomes[rng.random_range(0..outcomes.len())])
                .collect();
            let c = success_curve_of(&sample).ok()?;
            its99_min(&c, min_successes).ok().map(|(v, _)| v)
        })
        .collect();
    Ok(ItsEstimate {
        its99_opt: value,
        argmin_iter: curve.grid[i],
        stderr: std_dev(&boot),
        n_success: curve.successes[i],
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// One row of a noise-level sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaPoint {
    pub sigma: f64,
    pub n_trials: usize,
    pub n_solved: usize,
    /// `None` when the point is censored (too few successes).
    pub estimate: Option<ItsEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearch {
    pub best_sigma: f64,
    pub best: ItsEstimate,
    pub table: Vec<SigmaPoint>,
}

/// Picks the noise level with the lowest optimized ITS99; ties go to the
/// smaller sigma. `run` produces the trial outcomes for one sigma.
pub fn grid_search_sigma(
    sigma_grid: &[f64],
    mut run: impl FnMut(f64) -> Vec<Outcome>,
    min_successes: usize,
    resamples: usize,
    seed: u64,
) -> Result<GridSearch, MetricsError> {
    if sigma_grid.is_empty() {
        return Err(MetricsError::EmptyGrid);
    }
    let mut table = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let outcomes = run(sigma);
        let n_solved = outcomes.iter().filter(|o| o.solved).count();
        table.push(SigmaPoint {
            sigma,
            n_trials: outcomes.len(),
            n_solved,
            estimate: its99_opt(&outcomes, min_successes, resamples, seed).ok(),
        });
    }
    let mut best: Option<(f64, &ItsEstimate)> = None;
    for p in &table {
        if let Some(e) = &p.estimate {
            let better = match best {
                None => true,
                Some((s, b)) => {
                    e.its99_opt < b.its99_opt || (e.its99_opt == b.its99_opt && p.sigma < s)
                }
            };
            if better {
                best = Some((p.sigma, e));
            }
        }
    }
    let (best_sigma, best) = best.ok_or(MetricsError::Unsolved)?;
    let best = best.clone();
    Ok(GridSearch {
        best_sigma,
        best,
        table,
    })
}
