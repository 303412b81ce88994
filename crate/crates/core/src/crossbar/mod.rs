//! Emulation of the in-memory crossbar solver: programming the binary clause
//! matrix, analog readout with device spread, and the per-iteration pipeline.

pub mod device;
pub mod pipeline;
pub mod program;

pub use device::{AnalogCrossbar, DeviceError, DeviceModel, Quantizer, ThresholdMode};
pub use pipeline::{
    candidate_set, eval_circuits, make_break_readout, readout_error_rate, row_readout, wta_select,
    CrossbarTrial, Emulator, PipelineError, PipelineState, Readout, RowDrives, StepReport,
};
pub use program::{input_vector, literal_column, program_crossbar, CrossbarProgram};
