//! Simulation and analysis of a pair of spins coupled by a periodic
//! delta-function interaction.
//!
//! The library evolves the exact quantum state of the two-spin system
//! alongside a matched classical Liouville ensemble and quantifies how
//! closely the two descriptions track each other: growth of variances,
//! differences of expectation values, relaxation of probability
//! distributions towards microcanonical equilibrium, and the break-times
//! at which the descriptions part ways.
//!
//! Module layout:
//!
//! * [`wigner`] — rotation matrices `d^j_{m',m}(theta)` and z-rotation
//!   phases, the numerical workhorse behind every quantum operation;
//! * [`quantum`] — the state vector, the factored one-kick Floquet
//!   operator, observables and marginal distributions;
//! * [`classical`] — the stroboscopic map on the two-sphere pair, tangent
//!   dynamics and Lyapunov exponents, matched-density ensembles;
//! * [`analysis`] — difference measures, entropy and fluctuation
//!   statistics, exponential/scaling/break-time fits;
//! * [`runner`] — experiment configuration, execution and CSV output.

pub mod analysis;
pub mod classical;
pub mod quantum;
pub mod runner;
pub mod spin;
pub mod wigner;

pub use spin::Spin;

/// Errors produced by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Array or state dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// The request exceeds a validated capacity limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// The direct-formula oracle was asked for a spin outside its range.
    #[error("oracle range exceeded: {0}")]
    OracleRange(String),
    /// A configuration file or override could not be interpreted.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem failure while writing experiment output.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
