//! Experiment execution: configuration, deterministic drivers for the
//! paired quantum/classical runs, and CSV serialization.
//!
//! Every experiment is a pure function of its [`config::Config`]; reruns
//! with the same configuration and master seed produce byte-identical
//! CSV files regardless of the worker count.

pub mod config;
pub mod csv;
pub mod drivers;
pub mod experiments;

pub use config::{Config, Experiment};
pub use csv::CsvTable;
pub use experiments::run_experiment;

/// Quantum spins above this are refused with a capacity error; the
/// rotation kernel is validated up to here.
pub const MAX_QUANTUM_SPIN: f64 = 250.0;
