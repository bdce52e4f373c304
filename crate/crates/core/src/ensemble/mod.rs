//! Reproducible Monte Carlo campaigns: independent random streams per
//! trajectory, parallel execution with an order-fixed merge, commutator
//! kernels for the ordering correction of output spectra, and the vacuum
//! calibration run.

mod calibration;
mod campaign;
mod response;
mod stream;

pub use calibration::{calibrate_shot_noise, Calibration, CALIBRATION_TOLERANCE};
pub use campaign::{
    resolve_pump, run_campaign, CampaignResult, CampaignSpec, Initialization, IntensitySpectrum,
    Manifest, PositionTrack, PumpLevel, Relaxation, TrajectoryDiagnostics, WORKERS_ENV,
};
pub use response::pair_response_kernel;
pub use stream::derive_stream;
