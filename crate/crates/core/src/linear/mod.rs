//! Linearized signal dynamics about the signal-free state: pump steady
//! states, Bloch growth rates and thresholds, and stationary covariances.

mod bloch;
mod covariance;
mod lattice;
mod lyapunov;
mod steady;

pub use bloch::{
    find_threshold, growth_rate, max_growth, scan_wavenumbers, BlochOperator, Threshold,
    THRESHOLD_SCAN_POINTS, THRESHOLD_TOLERANCE,
};
pub use covariance::{
    intensity_spectrum, output_spectrum, pair_covariance, stationary_covariance,
    CovarianceSolution, PairCovariance,
};
pub use lattice::{Lattice, Truncation, DEFAULT_TRUNCATION};
pub use lyapunov::{resolvent, solve_lyapunov, spectral_matrix};
pub use steady::{pump_steady_state, PumpSteadyState};
