//! Seven-block iteration of the in-memory solver:
//! register -> clause array -> evaluation circuits -> make/break array ->
//! noise injection -> winner-take-all -> register update.

use rand::Rng;
use thiserror::Error;

use super::device::{AnalogCrossbar, DeviceModel};
use super::program::{input_vector, program_crossbar, CrossbarProgram};
use crate::energy::{Activity, Component, EnergyCoefficients, EnergyLedger};
use crate::formula::{Assignment, ClauseKind, Formula};
use crate::scalar::Scalar;
use crate::walksat::{initial_assignment, solver_rng, SolverParams, TrialResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("no violated row detected; nothing to flip")]
    NoCandidates,
    #[error("register width {found} does not match crossbar with {expected} variables")]
    RegisterWidth { expected: usize, found: usize },
}

/// How the clause array is read out.
#[derive(Debug, Clone)]
pub enum Readout<F> {
    /// Exact binary matrix-vector product.
    Ideal,
    /// Programmed conductances with quantized row currents.
    Analog(AnalogCrossbar<F>),
}

impl<F: Scalar> Readout<F> {
    pub fn is_ideal(&self) -> bool {
        matches!(self, Readout::Ideal)
    }
}

/// True-literal count of every clause row for the given column drive.
pub fn row_readout<F: Scalar>(
    p: &CrossbarProgram,
    readout: &Readout<F>,
    drive: &[bool],
) -> Vec<u32> {
    match readout {
        Readout::Ideal => (0..p.rows())
            .map(|r| {
                p.row_columns(r)
                    .iter()
                    .filter(|&&c| drive[c as usize])
                    .count() as u32
            })
            .collect(),
        Readout::Analog(xb) => xb.row_counts(p, drive),
    }
}

/// Fraction of row reads that disagree with the ideal count, over `inputs`
/// uniformly random registers drawn from `rng`.
pub fn readout_error_rate<F: Scalar, R: Rng + ?Sized>(
    p: &CrossbarProgram,
    readout: &Readout<F>,
    inputs: usize,
    rng: &mut R,
) -> f64 {
    if inputs == 0 || p.rows() == 0 {
        return 0.0;
    }
    let mut wrong = 0usize;
    for _ in 0..inputs {
        let drive = input_vector(&Assignment::random(p.num_vars(), rng));
        let ideal = row_readout(p, &Readout::<F>::Ideal, &drive);
        let read = row_readout(p, readout, &drive);
        wrong += ideal.iter().zip(&read).filter(|(a, b)| a != b).count();
    }
    wrong as f64 / (inputs * p.rows()) as f64
}

/// Row drives of the make/break array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDrives {
    /// Violated rows: flipping any of their variables repairs them.
    pub make: Vec<bool>,
    /// Rows that a flip of the right variable would violate.
    pub brk: Vec<bool>,
}

impl RowDrives {
    pub fn any_make(&self) -> bool {
        self.make.iter().any(|&m| m)
    }
}

/// Comparators for CNF rows (`== 0`, `== 1`) and LSB detection for XOR rows.
pub fn eval_circuits(p: &CrossbarProgram, counts: &[u32]) -> RowDrives {
    let mut make = Vec::with_capacity(p.rows());
    let mut brk = Vec::with_capacity(p.rows());
    for (r, &n) in counts.iter().enumerate() {
        let n = n.min(p.arity(r) as u32);
        match p.kind(r) {
            ClauseKind::Cnf => {
                make.push(n == 0);
                brk.push(n == 1);
            }
            ClauseKind::Xor => {
                let odd = n & 1 == 1;
                make.push(!odd);
                brk.push(odd);
            }
        }
    }
    RowDrives { make, brk }
}

/// Per-variable make and break values read from the transposed array.
///
/// Every row driven by `make` contributes to both literal columns of each of
/// its variables. XOR break rows do the same; CNF break rows only contribute
/// through the column of the currently true literal, since flipping a
/// variable whose literal is false cannot break a satisfied CNF clause.
/// Ideal readout yields integers; analog readout yields currents in units of
/// one ideal level, including off-cell leakage.
pub fn make_break_readout<F: Scalar>(
    p: &CrossbarProgram,
    readout: &Readout<F>,
    drives: &RowDrives,
    register: &Assignment,
) -> (Vec<F>, Vec<F>) {
    let n = p.num_vars();
    let true_col = |j: usize| 2 * j + usize::from(!register.get(j));
    match readout {
        Readout::Ideal => {
            let mut make = vec![0u32; n];
            let mut brk = vec![0u32; n];
            for r in 0..p.rows() {
                let (m, b) = (drives.make[r], drives.brk[r]);
                if !m && !b {
                    continue;
                }
                for &c in p.row_columns(r) {
                    let j = c as usize / 2;
                    if m {
                        make[j] += 1;
                    }
                    if b && (p.kind(r) == ClauseKind::Xor || c as usize == true_col(j)) {
                        brk[j] += 1;
                    }
                }
            }
            let to_f = |v: Vec<u32>| v.into_iter().map(|x| F::of_count(i64::from(x))).collect();
            (to_f(make), to_f(brk))
        }
        Readout::Analog(xb) => {
            let xor_brk: Vec<bool> = (0..p.rows())
                .map(|r| drives.brk[r] && p.kind(r) == ClauseKind::Xor)
                .collect();
            let cnf_brk: Vec<bool> = (0..p.rows())
                .map(|r| drives.brk[r] && p.kind(r) == ClauseKind::Cnf)
                .collect();
            let mut make = Vec::with_capacity(n);
            let mut brk = Vec::with_capacity(n);
            for j in 0..n {
                let (pos, neg) = (2 * j, 2 * j + 1);
                make.push(xb.in_levels(
                    xb.column_current(pos, &drives.make) + xb.column_current(neg, &drives.make),
                ));
                let i_brk = xb.column_current(pos, &xor_brk)
                    + xb.column_current(neg, &xor_brk)
                    + xb.column_current(true_col(j), &cnf_brk);
                brk.push(xb.in_levels(i_brk));
            }
            (make, brk)
        }
    }
}

/// Variables touched by at least one make-driven row, ascending.
pub fn candidate_set(p: &CrossbarProgram, drives: &RowDrives) -> Vec<usize> {
    let mut mask = vec![false; p.num_vars()];
    for r in 0..p.rows() {
        if drives.make[r] {
            for &c in p.row_columns(r) {
                mask[c as usize / 2] = true;
            }
        }
    }
    mask.iter()
        .enumerate()
        .filter_map(|(j, &m)| m.then_some(j))
        .collect()
}

/// Index of the largest masked value; ties go to the lowest index.
pub fn wta_select<F: Scalar>(values: &[F], mask: &[bool]) -> Result<usize, PipelineError> {
    let mut best: Option<(usize, F)> = None;
    for (j, (&v, &m)) in values.iter().zip(mask).enumerate() {
        if m && best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j).ok_or(PipelineError::NoCandidates)
}

/// Signals latched between blocks during the last iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineState<F> {
    pub register: Assignment,
    pub row_counts: Vec<u32>,
    pub make: Vec<F>,
    pub brk: Vec<F>,
    /// `make - break + sigma * e` for candidates, `-inf` elsewhere.
    pub noisy_gain: Vec<F>,
    pub candidates: Vec<usize>,
}

impl<F: Scalar> PipelineState<F> {
    pub fn new(register: Assignment) -> Self {
        PipelineState {
            register,
            row_counts: Vec::new(),
            make: Vec::new(),
            brk: Vec::new(),
            noisy_gain: Vec::new(),
            candidates: Vec::new(),
        }
    }
}

/// Result of one emulated iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub flipped: usize,
    pub activity: Activity,
    /// The candidate set was empty and the WTA saw every variable.
    pub unmasked: bool,
}

/// Outcome of a crossbar trial.
#[derive(Debug, Clone)]
pub struct CrossbarTrial<F> {
    pub result: TrialResult,
    pub ledger: EnergyLedger<F>,
    /// Iterations in which the readout flagged no violated row although the
    /// register was not a solution, so the WTA arbitrated over all variables.
    pub unmasked_steps: u64,
}

/// A programmed crossbar together with its readout model.
#[derive(Debug, Clone)]
pub struct Emulator<F> {
    program: CrossbarProgram,
    readout: Readout<F>,
}

impl<F: Scalar> Emulator<F> {
    pub fn ideal(f: &Formula) -> Self {
        Emulator {
            program: program_crossbar(f),
            readout: Readout::Ideal,
        }
    }

    /// Programs a non-ideal device; conductance sampling and threshold
    /// calibration draw from `device_seed`, independent of trial seeds.
    pub fn nonideal(f: &Formula, device: &DeviceModel<F>, device_seed: u64) -> Self {
        let program = program_crossbar(f);
        let mut rng = solver_rng(device_seed);
        let xb = AnalogCrossbar::program(&program, device, &mut rng);
        Emulator {
            program,
            readout: Readout::Analog(xb),
        }
    }

    pub fn program(&self) -> &CrossbarProgram {
        &self.program
    }

    pub fn readout(&self) -> &Readout<F> {
        &self.readout
    }

    /// Runs the seven blocks once, flipping one register bit. Fails with
    /// [`PipelineError::NoCandidates`] when no row reads as violated.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut PipelineState<F>,
        noise: F,
        rng: &mut R,
    ) -> Result<StepReport, PipelineError> {
        self.step_inner(state, noise, rng, false)
    }

    /// Like [`Emulator::step`], but an empty candidate set opens the WTA to
    /// every variable instead of failing. Used once the host knows the
    /// register is not a solution, so a misread cannot stall the search.
    pub fn step_unmasked_fallback<R: Rng + ?Sized>(
        &self,
        state: &mut PipelineState<F>,
        noise: F,
        rng: &mut R,
    ) -> Result<StepReport, PipelineError> {
        self.step_inner(state, noise, rng, true)
    }

    fn step_inner<R: Rng + ?Sized>(
        &self,
        state: &mut PipelineState<F>,
        noise: F,
        rng: &mut R,
        fallback: bool,
    ) -> Result<StepReport, PipelineError> {
        let p = &self.program;
        if state.register.len() != p.num_vars() {
            return Err(PipelineError::RegisterWidth {
                expected: p.num_vars(),
                found: state.register.len(),
            });
        }
        let drive = input_vector(&state.register);
        state.row_counts = row_readout(p, &self.readout, &drive);
        let drives = eval_circuits(p, &state.row_counts);
        state.candidates = candidate_set(p, &drives);
        let unmasked = state.candidates.is_empty();
        if unmasked {
            if !fallback || p.num_vars() == 0 {
                return Err(PipelineError::NoCandidates);
            }
            state.candidates = (0..p.num_vars()).collect();
        }
        let (make, brk) = make_break_readout(p, &self.readout, &drives, &state.register);
        state.make = make;
        state.brk = brk;

        let mut mask = vec![false; p.num_vars()];
        state.noisy_gain = vec![F::neg_infinity(); p.num_vars()];
        for &j in &state.candidates {
            let e = F::standard_normal(rng);
            state.noisy_gain[j] = state.make[j] - state.brk[j] + noise * e;
            mask[j] = true;
        }
        let flipped = wta_select(&state.noisy_gain, &mask)?;
        state.register.flip(flipped);

        let u = state.candidates.len() as u64;
        let mut activity = Activity::default();
        activity.record(Component::ClauseArray, p.rows() as u64);
        activity.record(
            Component::CnfComparator,
            p.count_kind(ClauseKind::Cnf) as u64,
        );
        activity.record(Component::XorAdc, p.count_kind(ClauseKind::Xor) as u64);
        activity.record(Component::MakeBreakArray, 2 * p.cols() as u64);
        activity.record(Component::Prng, u);
        activity.record(Component::Dac, u);
        activity.record(Component::Wta, 1);
        activity.record(Component::Register, 1);
        Ok(StepReport {
            flipped,
            activity,
            unmasked,
        })
    }

    /// Runs one trial. Termination is checked digitally on the register
    /// before every iteration, as in the reference solver.
    pub fn solve(
        &self,
        f: &Formula,
        params: &SolverParams<F>,
        coeffs: &EnergyCoefficients<F>,
    ) -> CrossbarTrial<F> {
        let mut rng = solver_rng(params.seed);
        let init = initial_assignment(f.num_vars(), params.init, &mut rng);
        let mut state = PipelineState::new(init);
        let mut ledger = EnergyLedger::new();
        let mut flips = params.record_flips.then(Vec::new);
        let mut draws = 0u64;
        let mut iter = 0u64;
        let mut unmasked_steps = 0u64;
        let solved = loop {
            if f.is_satisfied(&state.register) {
                break true;
            }
            if iter >= params.max_iter {
                break false;
            }
            let report = self
                .step_unmasked_fallback(&mut state, params.noise_level, &mut rng)
                .expect("register width matches and formula has variables");
            if report.unmasked {
                unmasked_steps += 1;
            }
            ledger.accumulate(&report.activity, coeffs);
            draws += report.activity.get(Component::Prng);
            if let Some(log) = flips.as_mut() {
                log.push(report.flipped as u32);
            }
            iter += 1;
        };
        CrossbarTrial {
            result: TrialResult {
                seed: params.seed,
                solved,
                iterations: iter,
                final_assignment: state.register,
                flips,
                candidate_draws: draws,
            },
            ledger,
            unmasked_steps,
        }
    }
}
