//! Stochastic integration of the pump/signal field equations.

mod integrator;
mod noise;

pub use integrator::{drift, Integrator, IntegratorSettings, Observer, Scheme};
pub use noise::{synthesize_noise, NoiseIncrement};
