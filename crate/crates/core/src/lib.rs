//! Simulation and quantum-noise analysis of a degenerate optical parametric
//! oscillator whose pump and signal detunings are periodically modulated in
//! the transverse plane by an intracavity photonic crystal.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: grid, detuning profiles, parameters and presets.
//! - [`dynamics`]: the stochastic field equations and their split-step integrator.
//! - [`linear`]: pump steady states, Bloch growth rates, thresholds and
//!   stationary covariances of the linearised signal.
//! - [`stats`]: far-field modes, moment accumulators and the squeezing,
//!   EPR and inseparability criteria.
//! - [`ensemble`]: reproducible Monte Carlo campaigns.
//! - [`figures`]: tabular datasets behind the threshold and noise figures.

pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod figures;
pub mod linear;
pub mod model;
pub mod stats;

mod fft;

pub use error::{Error, Result};
pub use model::{FieldState, Grid, ModelParams, Preset};
