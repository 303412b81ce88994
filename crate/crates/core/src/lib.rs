//! Hybrid XOR-CNF satisfiability: formulas and file formats, the WalkSAT-XNF
//! local search, an emulator of the in-memory crossbar that accelerates it,
//! and the energy and time-to-solution accounting around both.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

pub mod bench;
pub mod crossbar;
pub mod dimacs;
pub mod energy;
pub mod formula;
pub mod gen;
pub mod metrics;
pub mod results;
pub mod scalar;
pub mod transform;
pub mod walksat;

pub use formula::{Assignment, Clause, ClauseKind, Formula, Literal};
pub use scalar::Scalar;

pub type SolverParams64 = walksat::SolverParams<f64>;
pub type SolverParams32 = walksat::SolverParams<f32>;
pub type DeviceModel64 = crossbar::DeviceModel<f64>;
pub type DeviceModel32 = crossbar::DeviceModel<f32>;
pub type Emulator64 = crossbar::Emulator<f64>;
pub type Emulator32 = crossbar::Emulator<f32>;
pub type EnergyCoefficients64 = energy::EnergyCoefficients<f64>;
pub type EnergyCoefficients32 = energy::EnergyCoefficients<f32>;
pub type EnergyLedger64 = energy::EnergyLedger<f64>;
pub type BenchConfig64 = bench::BenchConfig<f64>;
