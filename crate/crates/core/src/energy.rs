//! Activity-based energy, latency and area model of the crossbar accelerator.
//!
//! Every emulated iteration records how often each hardware component fires
//! ([`Activity`]). Energy is the dot product of those counts with a table of
//! per-event energies ([`EnergyCoefficients`]), so it is exactly linear in
//! both.
//!
//! Per-iteration activity for a formula with `N` variables, `C` rows
//! (`C_cnf + C_xor`) and `|U|` candidate variables:
//!
//! | component | events |
//! |---|---|
//! | clause array | `C` row reads |
//! | CNF comparators | `C_cnf` |
//! | XOR ADCs | `C_xor` |
//! | make/break array | `4N` column reads (make pass + break pass over `2N` columns) |
//! | PRNG | `|U|` Gaussian words |
//! | noise DACs | `|U|` conversions |
//! | WTA | 1 |
//! | register | 1 |

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::scalar::Scalar;

/// Calibrated default coefficient table shipped with the crate.
pub const DEFAULT_COEFFICIENTS_TOML: &str = include_str!("../data/coefficients.toml");

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("unknown activity event '{0}'")]
    UnknownEvent(String),
    #[error("no iterations recorded")]
    ZeroIterations,
    #[error("coefficient '{0}' must be finite and non-negative")]
    NegativeCoefficient(&'static str),
    #[error("t_iter_ns must be positive")]
    NonPositiveLatency,
    #[error("coefficient file")]
    Parse(#[from] toml::de::Error),
    #[error("i/o")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    ClauseArray,
    MakeBreakArray,
    CnfComparator,
    XorAdc,
    Prng,
    Dac,
    Wta,
    Register,
}

impl Component {
    pub const ALL: [Component; 8] = [
        Component::ClauseArray,
        Component::MakeBreakArray,
        Component::CnfComparator,
        Component::XorAdc,
        Component::Prng,
        Component::Dac,
        Component::Wta,
        Component::Register,
    ];

    #[inline]
    fn index(self) -> usize {
        self as usize
    }

    /// Event name, also the stem of the coefficient key (`<key>_pj`).
    pub fn key(self) -> &'static str {
        match self {
            Component::ClauseArray => "clause_row",
            Component::MakeBreakArray => "makebreak_column",
            Component::CnfComparator => "cnf_comparator",
            Component::XorAdc => "xor_adc",
            Component::Prng => "prng_word",
            Component::Dac => "dac_conversion",
            Component::Wta => "wta",
            Component::Register => "register_update",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Component::ClauseArray => "clause array",
            Component::MakeBreakArray => "make/break array",
            Component::CnfComparator => "CNF comparators",
            Component::XorAdc => "XOR ADCs",
            Component::Prng => "PRNG",
            Component::Dac => "noise DACs",
            Component::Wta => "WTA",
            Component::Register => "register",
        }
    }
}

impl std::str::FromStr for Component {
    type Err = EnergyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Component::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| EnergyError::UnknownEvent(s.to_owned()))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Event counts per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Activity {
    counts: [u64; 8],
}

impl Activity {
    #[inline]
    pub fn record(&mut self, c: Component, n: u64) {
        self.counts[c.index()] += n;
    }

    #[inline]
    pub fn get(&self, c: Component) -> u64 {
        self.counts[c.index()]
    }

    pub fn total_events(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn scaled(&self, k: u64) -> Activity {
        let mut out = *self;
        for c in &mut out.counts {
            *c *= k;
        }
        out
    }

    /// Per-iteration activity excluding the noise path, which depends on the
    /// candidate count.
    pub fn fixed_per_iteration(f: &Formula) -> Activity {
        let mut a = Activity::default();
        a.record(Component::ClauseArray, f.num_clauses() as u64);
        a.record(Component::CnfComparator, f.num_cnf_clauses() as u64);
        a.record(Component::XorAdc, f.num_xor_clauses() as u64);
        a.record(Component::MakeBreakArray, 4 * f.num_vars() as u64);
        a.record(Component::Wta, 1);
        a.record(Component::Register, 1);
        a
    }

    /// Activity of `iterations` iterations that scored `candidate_draws`
    /// candidates in total.
    pub fn for_run(f: &Formula, iterations: u64, candidate_draws: u64) -> Activity {
        let mut a = Self::fixed_per_iteration(f).scaled(iterations);
        a.record(Component::Prng, candidate_draws);
        a.record(Component::Dac, candidate_draws);
        a
    }
}

impl Add for Activity {
    type Output = Activity;
    fn add(mut self, rhs: Activity) -> Activity {
        self += rhs;
        self
    }
}

impl AddAssign for Activity {
    fn add_assign(&mut self, rhs: Activity) {
        for (a, b) in self.counts.iter_mut().zip(rhs.counts) {
            *a += b;
        }
    }
}

/// Energy per event in picojoules and iteration latency in nanoseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCoefficients<F> {
    /// Revision of the coefficient table; informational.
    #[serde(default)]
    pub version: u32,
    pub clause_row_pj: F,
    pub makebreak_column_pj: F,
    pub cnf_comparator_pj: F,
    pub xor_adc_pj: F,
    pub prng_word_pj: F,
    pub dac_conversion_pj: F,
    pub wta_pj: F,
    pub register_update_pj: F,
    pub t_iter_ns: F,
}

impl<F: Scalar> EnergyCoefficients<F> {
    pub fn get(&self, c: Component) -> F {
        match c {
            Component::ClauseArray => self.clause_row_pj,
            Component::MakeBreakArray => self.makebreak_column_pj,
            Component::CnfComparator => self.cnf_comparator_pj,
            Component::XorAdc => self.xor_adc_pj,
            Component::Prng => self.prng_word_pj,
            Component::Dac => self.dac_conversion_pj,
            Component::Wta => self.wta_pj,
            Component::Register => self.register_update_pj,
        }
    }

    fn slot(&mut self, c: Component) -> &mut F {
        match c {
            Component::ClauseArray => &mut self.clause_row_pj,
            Component::MakeBreakArray => &mut self.makebreak_column_pj,
            Component::CnfComparator => &mut self.cnf_comparator_pj,
            Component::XorAdc => &mut self.xor_adc_pj,
            Component::Prng => &mut self.prng_word_pj,
            Component::Dac => &mut self.dac_conversion_pj,
            Component::Wta => &mut self.wta_pj,
            Component::Register => &mut self.register_update_pj,
        }
    }

    pub fn set(&mut self, c: Component, value: F) {
        *self.slot(c) = value;
    }

    /// All event energies zero, latency kept at `t_iter_ns`.
    pub fn zero(t_iter_ns: F) -> Self {
        EnergyCoefficients {
            version: 0,
            clause_row_pj: F::zero(),
            makebreak_column_pj: F::zero(),
            cnf_comparator_pj: F::zero(),
            xor_adc_pj: F::zero(),
            prng_word_pj: F::zero(),
            dac_conversion_pj: F::zero(),
            wta_pj: F::zero(),
            register_update_pj: F::zero(),
            t_iter_ns,
        }
    }

    /// The shipped calibrated table.
    pub fn calibrated() -> Self {
        Self::from_toml_str(DEFAULT_COEFFICIENTS_TOML).expect("shipped coefficient file is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, EnergyError> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, EnergyError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        for c in Component::ALL {
            let v = self.get(c);
            if !v.is_finite() || v < F::zero() {
                return Err(EnergyError::NegativeCoefficient(c.key()));
            }
        }
        if !self.t_iter_ns.is_finite() || self.t_iter_ns <= F::zero() {
            return Err(EnergyError::NonPositiveLatency);
        }
        Ok(())
    }

    pub fn scaled(&self, k: F) -> Self {
        let mut out = self.clone();
        for c in Component::ALL {
            out.set(c, self.get(c) * k);
        }
        out
    }

    pub fn is_all_zero(&self) -> bool {
        Component::ALL.iter().all(|&c| self.get(c) == F::zero())
    }

    /// `sum_c count_c * coefficient_c` in picojoules.
    pub fn energy_of(&self, activity: &Activity) -> F {
        Component::ALL
            .iter()
            .map(|&c| F::of(activity.get(c) as f64) * self.get(c))
            .sum()
    }
}

/// Accumulated activity and energy of one or more runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger<F> {
    activity: Activity,
    energy_pj: F,
    iterations: u64,
}

impl<F: Scalar> Default for EnergyLedger<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> EnergyLedger<F> {
    pub fn new() -> Self {
        EnergyLedger {
            activity: Activity::default(),
            energy_pj: F::zero(),
            iterations: 0,
        }
    }

    /// Adds one iteration's events.
    pub fn accumulate(&mut self, step: &Activity, coeffs: &EnergyCoefficients<F>) {
        self.accumulate_iterations(step, 1, coeffs);
    }

    /// Adds the events of `iterations` iterations at once.
    pub fn accumulate_iterations(
        &mut self,
        activity: &Activity,
        iterations: u64,
        coeffs: &EnergyCoefficients<F>,
    ) {
        self.activity += *activity;
        self.energy_pj = self.energy_pj + coeffs.energy_of(activity);
        self.iterations += iterations;
    }

    /// Adds one iteration described by `(event name, count)` pairs.
    pub fn accumulate_named(
        &mut self,
        events: &[(&str, u64)],
        coeffs: &EnergyCoefficients<F>,
    ) -> Result<(), EnergyError> {
        let mut step = Activity::default();
        for &(name, n) in events {
            step.record(name.parse()?, n);
        }
        self.accumulate(&step, coeffs);
        Ok(())
    }

    /// Associative merge of two ledgers built with the same coefficients.
    pub fn merge(&mut self, other: &EnergyLedger<F>) {
        self.activity += other.activity;
        self.energy_pj = self.energy_pj + other.energy_pj;
        self.iterations += other.iterations;
    }

    pub fn activity(&self) -> &Activity {
        &self.activity
    }

    pub fn energy_pj(&self) -> F {
        self.energy_pj
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn energy_per_iteration(&self) -> Result<F, EnergyError> {
        if self.iterations == 0 {
            return Err(EnergyError::ZeroIterations);
        }
        Ok(self.energy_pj / F::of(self.iterations as f64))
    }

    /// Per-component energy and share of the total. Shares are zero when the
    /// total is zero.
    pub fn breakdown(&self, coeffs: &EnergyCoefficients<F>) -> Vec<ComponentEnergy<F>> {
        let total = coeffs.energy_of(&self.activity);
        Component::ALL
            .iter()
            .map(|&c| {
                let e = F::of(self.activity.get(c) as f64) * coeffs.get(c);
                let share = if total > F::zero() {
                    e / total
                } else {
                    F::zero()
                };
                ComponentEnergy {
                    component: c,
                    events: self.activity.get(c),
                    energy_pj: e,
                    share,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentEnergy<F> {
    pub component: Component,
    pub events: u64,
    pub energy_pj: F,
    pub share: F,
}

/// Energy to solution in joules from iterations and picojoules per iteration.
pub fn ets<F: Scalar>(its: F, e_mean_pj: F) -> F {
    its * e_mean_pj * F::of(1e-12)
}

/// Time to solution in seconds from iterations and nanoseconds per iteration.
pub fn tts<F: Scalar>(its: F, t_iter_ns: F) -> F {
    its * t_iter_ns * F::of(1e-9)
}

/// Energy of a CPU run drawing `power_w` for `tts_s` seconds.
pub fn cpu_ets<F: Scalar>(tts_s: F, power_w: F) -> F {
    tts_s * power_w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrayMode {
    /// One transpose array evaluates make and break one after the other.
    #[default]
    Sequential,
    /// Separate make and break arrays evaluated in parallel.
    Pipelined,
}

/// Crossbar cell counts. Periphery (ADCs, DACs, comparators) is not included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaEstimate {
    /// `2N * C` cells of one array.
    pub cells_per_array: u64,
    /// Clause array plus one or two transpose arrays.
    pub arrays: u32,
    pub total_cells: u64,
}

impl AreaEstimate {
    /// Cell-count ratio `self / other` of one array each.
    pub fn relative_to(&self, other: &AreaEstimate) -> f64 {
        if other.cells_per_array == 0 {
            return if self.cells_per_array == 0 {
                1.0
            } else {
                f64::INFINITY
            };
        }
        self.cells_per_array as f64 / other.cells_per_array as f64
    }
}

pub fn area(f: &Formula, mode: ArrayMode) -> AreaEstimate {
    area_for_size(f.num_vars(), f.num_clauses(), mode)
}

pub fn area_for_size(num_vars: usize, num_clauses: usize, mode: ArrayMode) -> AreaEstimate {
    let cells = 2 * num_vars as u64 * num_clauses as u64;
    let arrays = match mode {
        ArrayMode::Sequential => 2,
        ArrayMode::Pipelined => 3,
    };
    AreaEstimate {
        cells_per_array: cells,
        arrays,
        total_cells: cells * u64::from(arrays),
    }
}
