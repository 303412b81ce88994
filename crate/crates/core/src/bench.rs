//! Trial fan-out per backend and aggregation into result rows.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::crossbar::{DeviceModel, Emulator};
use crate::energy::{Activity, EnergyCoefficients, EnergyLedger};
use crate::formula::Formula;
use crate::gen::{gen_planted_mixed, MixedSpec, Planted};
use crate::metrics::{its99_opt, MetricsError, Outcome};
use crate::results::{RecordKind, ResultRecord};
use crate::scalar::Scalar;
use crate::walksat::{self, SolverError, SolverParams, TrialResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Reference,
    CrossbarIdeal,
    CrossbarNonideal,
}

impl Backend {
    pub const ALL: [Backend; 3] = [
        Backend::Reference,
        Backend::CrossbarIdeal,
        Backend::CrossbarNonideal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Reference => "reference",
            Backend::CrossbarIdeal => "crossbar-ideal",
            Backend::CrossbarNonideal => "crossbar-nonideal",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                format!("unknown backend '{s}', expected reference, crossbar-ideal or crossbar-nonideal")
            })
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("backend crossbar-nonideal requires a device model")]
    MissingDevice,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone)]
pub struct BenchConfig<F> {
    pub backend: Backend,
    pub params: SolverParams<F>,
    pub trials: usize,
    pub device: Option<DeviceModel<F>>,
    /// Seed for conductance sampling and threshold calibration.
    pub device_seed: u64,
    pub coeffs: EnergyCoefficients<F>,
    /// Measure wall-clock time per trial; off keeps output byte-identical
    /// across reruns.
    pub wall_time: bool,
}

impl<F: Scalar> BenchConfig<F> {
    pub fn new(backend: Backend, params: SolverParams<F>, trials: usize) -> Self {
        BenchConfig {
            backend,
            device_seed: params.seed,
            params,
            trials,
            device: None,
            coeffs: EnergyCoefficients::calibrated(),
            wall_time: true,
        }
    }
}

/// One finished trial with its emulated energy.
#[derive(Debug, Clone)]
pub struct TrialRecord<F> {
    pub result: TrialResult,
    pub ledger: EnergyLedger<F>,
    pub wall_ns: u64,
    /// Crossbar iterations that fell back to an unmasked WTA.
    pub unmasked_steps: u64,
}

/// Runs `cfg.trials` trials with seeds `params.seed + i`, in parallel,
/// returned in seed order.
pub fn run_backend<F: Scalar>(
    f: &Formula,
    cfg: &BenchConfig<F>,
) -> Result<Vec<TrialRecord<F>>, BenchError> {
    cfg.params.validate()?;
    let emulator = match cfg.backend {
        Backend::Reference => None,
        Backend::CrossbarIdeal => Some(Emulator::ideal(f)),
        Backend::CrossbarNonideal => {
            let d = cfg.device.as_ref().ok_or(BenchError::MissingDevice)?;
            Some(Emulator::nonideal(f, d, cfg.device_seed))
        }
    };
    let seed0 = cfg.params.seed;
    Ok((0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let params = cfg.params.with_seed(seed0.wrapping_add(i));
            let start = cfg.wall_time.then(Instant::now);
            let (result, ledger, unmasked_steps) = match &emulator {
                None => {
                    let r = walksat::solve(f, &params);
                    let mut ledger = EnergyLedger::new();
                    let act = Activity::for_run(f, r.iterations, r.candidate_draws);
                    ledger.accumulate_iterations(&act, r.iterations, &cfg.coeffs);
                    (r, ledger, 0)
                }
                Some(e) => {
                    let t = e.solve(f, &params, &cfg.coeffs);
                    (t.result, t.ledger, t.unmasked_steps)
                }
            };
            let wall_ns = start.map_or(0, |s| s.elapsed().as_nanos() as u64);
            TrialRecord {
                result,
                ledger,
                wall_ns,
                unmasked_steps,
            }
        })
        .collect())
}

pub fn representation(f: &Formula) -> &'static str {
    if f.num_xor_clauses() > 0 {
        "xnf"
    } else {
        "cnf"
    }
}

/// Per-trial rows followed by one aggregate row.
pub fn result_rows<F: Scalar>(
    instance: &str,
    f: &Formula,
    cfg: &BenchConfig<F>,
    records: &[TrialRecord<F>],
    min_successes: usize,
    resamples: usize,
) -> Vec<ResultRecord> {
    let sigma = cfg.params.noise_level.to_f64_lossy();
    let rep = representation(f);
    let backend = cfg.backend.name();
    let mut rows: Vec<ResultRecord> = records
        .iter()
        .map(|t| {
            let mut r = ResultRecord::trial(
                instance,
                rep,
                backend,
                t.result.seed,
                sigma,
                t.result.solved,
                t.result.iterations,
            );
            r.wall_ns = t.wall_ns;
            r.energy_pj = Some(t.ledger.energy_pj().to_f64_lossy());
            r
        })
        .collect();
    rows.push(aggregate_row(
        instance,
        rep,
        cfg,
        records,
        min_successes,
        resamples,
    ));
    rows
}

pub fn aggregate_row<F: Scalar>(
    instance: &str,
    representation: &str,
    cfg: &BenchConfig<F>,
    records: &[TrialRecord<F>],
    min_successes: usize,
    resamples: usize,
) -> ResultRecord {
    let mut total = EnergyLedger::<F>::new();
    for t in records {
        total.merge(&t.ledger);
    }
    let iterations: u64 = records.iter().map(|t| t.result.iterations).sum();
    let n_solved = records.iter().filter(|t| t.result.solved).count();
    let outcomes: Vec<Outcome> = records.iter().map(|t| Outcome::from(&t.result)).collect();
    let est = its99_opt(&outcomes, min_successes, resamples, cfg.params.seed).ok();
    let e_iter = total.energy_per_iteration().ok().map(|e| e.to_f64_lossy());
    let t_iter = cfg.coeffs.t_iter_ns.to_f64_lossy();
    ResultRecord {
        instance: instance.to_owned(),
        representation: representation.to_owned(),
        backend: cfg.backend.name().to_owned(),
        seed: None,
        sigma: cfg.params.noise_level.to_f64_lossy(),
        solved: None,
        iterations,
        wall_ns: records.iter().map(|t| t.wall_ns).sum(),
        energy_pj: Some(total.energy_pj().to_f64_lossy()),
        kind: RecordKind::Aggregate,
        n_trials: Some(records.len() as u64),
        n_solved: Some(n_solved as u64),
        its99_opt: est.as_ref().map(|e| e.its99_opt),
        its99_stderr: est.as_ref().map(|e| e.stderr),
        tts_s: est.as_ref().map(|e| e.its99_opt * t_iter * 1e-9),
        ets_j: match (&est, e_iter) {
            (Some(e), Some(pj)) => Some(e.its99_opt * pj * 1e-12),
            _ => None,
        },
        energy_per_iter_pj: e_iter,
    }
}

/// Synthetic CNF workload with the dimensions of the McEliece CNF example
/// (174 variables, 623 clauses): planted random 3-CNF.
pub fn mceliece_like_cnf(seed: u64) -> Planted {
    gen_planted_mixed(
        &MixedSpec {
            num_vars: 174,
            cnf_clauses: 623,
            cnf_arity: 3,
            xor_clauses: 0,
            xor_arity: 0,
        },
        seed,
    )
    .expect("valid workload shape")
}

/// Synthetic XNF workload with the dimensions of the McEliece XNF example
/// (32 variables, 96 clauses, 13 of them XOR).
pub fn mceliece_like_xnf(seed: u64) -> Planted {
    gen_planted_mixed(
        &MixedSpec {
            num_vars: 32,
            cnf_clauses: 83,
            cnf_arity: 3,
            xor_clauses: 13,
            xor_arity: 5,
        },
        seed,
    )
    .expect("valid workload shape")
}

/// Merged ledger of `trials` ideal-crossbar runs; the basis of per-iteration
/// energy reports.
pub fn workload_ledger<F: Scalar>(
    f: &Formula,
    params: &SolverParams<F>,
    trials: usize,
    coeffs: &EnergyCoefficients<F>,
) -> Result<EnergyLedger<F>, BenchError> {
    let mut cfg = BenchConfig::new(Backend::CrossbarIdeal, params.clone(), trials);
    cfg.coeffs = coeffs.clone();
    cfg.wall_time = false;
    let mut total = EnergyLedger::new();
    for t in run_backend(f, &cfg)? {
        total.merge(&t.ledger);
    }
    Ok(total)
}
