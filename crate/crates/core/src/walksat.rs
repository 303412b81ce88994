//! WalkSAT-XNF: full-neighbourhood stochastic local search over hybrid
//! XOR-CNF formulas.
//!
//! Every iteration collects the variables of all violated clauses, scores each
//! with `make - break` plus Gaussian noise `sigma * N(0, 1)` and flips the
//! highest-scoring one. Noise samples are drawn one per candidate in
//! ascending variable order; ties go to the lowest variable index. The
//! crossbar emulator follows the same discipline so both backends produce the
//! same flip sequence from the same seed.
//!
//! Iterations count flips: a trial solved at iteration `t` performed `t`
//! flips, and the formula is checked before the first flip.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Assignment, ClauseKind, Formula};
use crate::scalar::Scalar;

/// Per-trial pseudo-random generator (xorshift family, 64-bit output).
pub type SolverRng = Xoshiro256PlusPlus;

pub fn solver_rng(seed: u64) -> SolverRng {
    SolverRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("max_iter must be at least 1")]
    ZeroMaxIter,
    #[error("noise level must be finite and non-negative")]
    BadNoise,
    #[error("assignment already satisfies the formula; no candidate to flip")]
    AlreadySatisfied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    #[default]
    AllTrue,
    Random,
}

impl std::str::FromStr for Init {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-true" => Ok(Init::AllTrue),
            "random" => Ok(Init::Random),
            other => Err(format!(
                "unknown init '{other}', expected all-true or random"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams<F> {
    /// Standard deviation of the Gaussian perturbation added to each gain.
    pub noise_level: F,
    /// Maximum number of flips per trial.
    pub max_iter: u64,
    pub seed: u64,
    pub init: Init,
    /// Keep the flipped variable of every iteration in the result.
    pub record_flips: bool,
}

impl<F: Scalar> SolverParams<F> {
    pub fn new(noise_level: F, max_iter: u64, seed: u64) -> Result<Self, SolverError> {
        let p = SolverParams {
            noise_level,
            max_iter,
            seed,
            init: Init::AllTrue,
            record_flips: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iter == 0 {
            return Err(SolverError::ZeroMaxIter);
        }
        if !self.noise_level.is_finite() || self.noise_level < F::zero() {
            return Err(SolverError::BadNoise);
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SolverParams {
            seed,
            ..self.clone()
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_flip_log(mut self, on: bool) -> Self {
        self.record_flips = on;
        self
    }
}

/// Make and break counts of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GainBreakdown {
    pub make: u32,
    pub brk: u32,
}

impl GainBreakdown {
    #[inline]
    pub fn gain(&self) -> i64 {
        i64::from(self.make) - i64::from(self.brk)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub seed: u64,
    pub solved: bool,
    /// Flips performed; equals `max_iter` when the trial ran out.
    pub iterations: u64,
    pub final_assignment: Assignment,
    pub flips: Option<Vec<u32>>,
    /// Total number of candidates scored over the trial (one noise sample each).
    pub candidate_draws: u64,
}

/// Initial assignment for a trial; consumes randomness only for [`Init::Random`].
pub fn initial_assignment<R: Rng + ?Sized>(num_vars: usize, init: Init, rng: &mut R) -> Assignment {
    match init {
        Init::AllTrue => Assignment::all_true(num_vars),
        Init::Random => Assignment::random(num_vars, rng),
    }
}

/// Make/break of `var` under `a`.
///
/// CNF: a violated clause counts as make; a clause whose only true literal is
/// `var`'s counts as break. XOR: even true-literal count is make, odd is break.
pub fn compute_gain(f: &Formula, a: &Assignment, var: usize) -> GainBreakdown {
    let values = a.as_slice();
    let mut g = GainBreakdown::default();
    for occ in f.occurrences(var) {
        let clause = f.clause(occ.clause as usize);
        let n = clause.count_true(values);
        match clause.kind() {
            ClauseKind::Cnf => {
                if n == 0 {
                    g.make += 1;
                } else if n == 1 && a.lit(clause.literals()[occ.position as usize]) {
                    g.brk += 1;
                }
            }
            ClauseKind::Xor => {
                if n.is_multiple_of(2) {
                    g.make += 1;
                } else {
                    g.brk += 1;
                }
            }
        }
    }
    g
}

/// Noisy argmax over `candidates` (ascending). One normal sample per candidate.
fn select<F: Scalar, R: Rng + ?Sized>(
    candidates: &[usize],
    noise: F,
    rng: &mut R,
    mut gain_of: impl FnMut(usize) -> i64,
) -> usize {
    noisy_argmax(candidates, noise, rng, |v| F::of_count(gain_of(v)))
}

pub(crate) fn noisy_argmax<F: Scalar, R: Rng + ?Sized>(
    candidates: &[usize],
    noise: F,
    rng: &mut R,
    mut gain_of: impl FnMut(usize) -> F,
) -> usize {
    let mut best = candidates[0];
    let mut best_val = F::neg_infinity();
    for &v in candidates {
        let e = F::standard_normal(rng);
        let noisy = gain_of(v) + noise * e;
        if noisy > best_val {
            best_val = noisy;
            best = v;
        }
    }
    best
}

/// One WalkSAT-XNF iteration on `a`; returns the flipped variable.
///
/// Recomputes everything from scratch; [`solve`] uses an incremental state
/// that makes identical choices.
pub fn step<F: Scalar, R: Rng + ?Sized>(
    f: &Formula,
    a: &mut Assignment,
    noise: F,
    rng: &mut R,
) -> Result<usize, SolverError> {
    let candidates = f.unsat_variables(a);
    if candidates.is_empty() {
        return Err(SolverError::AlreadySatisfied);
    }
    let v = select(&candidates, noise, rng, |v| compute_gain(f, a, v).gain());
    a.flip(v);
    Ok(v)
}

/// Incremental search state: per-clause true-literal counts and the set of
/// violated clauses.
struct Search<'f> {
    f: &'f Formula,
    values: Vec<bool>,
    true_count: Vec<u32>,
    unsat: Vec<u32>,
    unsat_pos: Vec<u32>,
    stamp: Vec<u64>,
    epoch: u64,
    candidates: Vec<usize>,
}

const NOT_LISTED: u32 = u32::MAX;

impl<'f> Search<'f> {
    fn new(f: &'f Formula, init: Assignment) -> Self {
        let values = init.into_vec();
        let mut s = Search {
            f,
            true_count: Vec::with_capacity(f.num_clauses()),
            unsat: Vec::new(),
            unsat_pos: vec![NOT_LISTED; f.num_clauses()],
            stamp: vec![0; f.num_vars()],
            epoch: 0,
            candidates: Vec::new(),
            values,
        };
        for (ci, c) in f.clauses().iter().enumerate() {
            let n = c.count_true(&s.values);
            s.true_count.push(n as u32);
            if !c.satisfied_by_count(n) {
                s.list(ci);
            }
        }
        s
    }

    fn list(&mut self, ci: usize) {
        self.unsat_pos[ci] = self.unsat.len() as u32;
        self.unsat.push(ci as u32);
    }

    fn unlist(&mut self, ci: usize) {
        let pos = self.unsat_pos[ci] as usize;
        let last = *self.unsat.last().unwrap();
        self.unsat.swap_remove(pos);
        if last as usize != ci {
            self.unsat_pos[last as usize] = pos as u32;
        }
        self.unsat_pos[ci] = NOT_LISTED;
    }

    fn collect_candidates(&mut self) {
        self.epoch += 1;
        self.candidates.clear();
        for &ci in &self.unsat {
            for v in self.f.clause(ci as usize).variables() {
                if self.stamp[v] != self.epoch {
                    self.stamp[v] = self.epoch;
                    self.candidates.push(v);
                }
            }
        }
        self.candidates.sort_unstable();
    }

    fn gain(&self, var: usize) -> i64 {
        let mut g = 0i64;
        for occ in self.f.occurrences(var) {
            let ci = occ.clause as usize;
            let clause = self.f.clause(ci);
            let n = self.true_count[ci];
            match clause.kind() {
                ClauseKind::Cnf => {
                    if n == 0 {
                        g += 1;
                    } else if n == 1
                        && clause.literals()[occ.position as usize].eval(self.values[var])
                    {
                        g -= 1;
                    }
                }
                ClauseKind::Xor => g += if n.is_multiple_of(2) { 1 } else { -1 },
            }
        }
        g
    }

    fn flip(&mut self, var: usize) {
        let old = self.values[var];
        for occ in self.f.occurrences(var) {
            let ci = occ.clause as usize;
            let clause = self.f.clause(ci);
            let was_true = clause.literals()[occ.position as usize].eval(old);
            let before = self.true_count[ci] as usize;
            let after = if was_true { before - 1 } else { before + 1 };
            self.true_count[ci] = after as u32;
            let sat_before = clause.satisfied_by_count(before);
            let sat_after = clause.satisfied_by_count(after);
            if sat_before && !sat_after {
                self.list(ci);
            } else if !sat_before && sat_after {
                self.unlist(ci);
            }
        }
        self.values[var] = !old;
    }
}

/// Runs one trial of WalkSAT-XNF.
pub fn solve<F: Scalar>(f: &Formula, params: &SolverParams<F>) -> TrialResult {
    let mut rng = solver_rng(params.seed);
    let init = initial_assignment(f.num_vars(), params.init, &mut rng);
    let mut s = Search::new(f, init);
    let mut flips = params.record_flips.then(Vec::new);
    let mut draws = 0u64;
    let mut iter = 0u64;
    let solved = loop {
        if s.unsat.is_empty() {
            break true;
        }
        if iter >= params.max_iter {
            break false;
        }
        s.collect_candidates();
        draws += s.candidates.len() as u64;
        let candidates = std::mem::take(&mut s.candidates);
        let v = select(&candidates, params.noise_level, &mut rng, |v| s.gain(v));
        s.candidates = candidates;
        s.flip(v);
        if let Some(log) = flips.as_mut() {
            log.push(v as u32);
        }
        iter += 1;
    };
    let final_assignment = Assignment::from_bools(s.values);
    let solved = solved && f.is_satisfied(&final_assignment);
    TrialResult {
        seed: params.seed,
        solved,
        iterations: iter,
        final_assignment,
        flips,
        candidate_draws: draws,
    }
}

/// Runs `n_trials` independent trials with seeds `seed_base + i`, in parallel,
/// returned in seed order.
pub fn run_trials<F: Scalar>(
    f: &Formula,
    params: &SolverParams<F>,
    n_trials: usize,
    seed_base: u64,
) -> Vec<TrialResult> {
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| solve(f, &params.with_seed(seed_base.wrapping_add(i))))
        .collect()
}
