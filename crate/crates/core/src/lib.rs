//! Discrete-time simulator of a frequency-method electric energy meter.
//!
//! Sinusoidal current and voltage are attenuated, multiplied and averaged
//! into an active-power voltage that drives a VCO. Every VCO cycle becomes one
//! 5 V energy pulse, calibrated to 1000 pulses per kWh, and the pulses are
//! counted in an 8-digit BCD register. Because the energy readout is always
//! an integer pulse count, its error does not grow with metering time.
//!
//! - [`blocks`]: the individual signal-chain blocks.
//! - [`circuit`]: parameters, the wired [`circuit::Meter`] and the energy readout.
//! - [`bcd`]: the packed BCD pulse register.
//! - [`oracle`]: analytic reference energy and a conventional integrating meter.
//! - [`harness`]: scenarios, result tables, traces and CSV output.
//! - [`cli`]: the `freqmeter` command line.

pub mod bcd;
pub mod blocks;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod harness;
pub mod oracle;

pub use circuit::{default_params, CircuitParams, Energy, Meter, StepOutputs};
pub use error::{Error, Result};
pub use harness::{run_scenario, run_table, RunResult, ScenarioSpec, TableId};
