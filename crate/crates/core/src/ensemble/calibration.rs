use serde::{Deserialize, Serialize};

use super::campaign::{run_campaign, CampaignSpec, Initialization, PumpLevel};
use crate::error::{Error, Result};
use crate::stats::{Estimate, Pooling, QuadratureCovariance};

/// Largest accepted relative deviation of the vacuum mode occupation from 1.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;

/// Shot-noise reference measured from undriven, uncoupled trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Q-ordered ⟨|a_k|²⟩ of the recorded pairs, averaged over ±k.
    pub mode_occupation: Vec<Estimate>,
    /// Output-field spectral covariance of the first pair, if recorded.
    pub output_covariance: Option<QuadratureCovariance>,
    /// Largest relative deviation of the occupations from 1.
    pub max_deviation: f64,
    pub config_hash: String,
}

impl Calibration {
    pub fn passed(&self) -> bool {
        self.max_deviation <= CALIBRATION_TOLERANCE
    }
}

/// Run `spec` with the drive and parametric coupling removed and check that
/// every recorded mode carries one vacuum unit.
pub fn calibrate_shot_noise(spec: &CampaignSpec) -> Result<Calibration> {
    let mut vacuum = spec.clone();
    vacuum.params = spec.params.vacuum();
    vacuum.pump = PumpLevel::Absolute(0.0);
    vacuum.threshold = None;
    vacuum.initialization = Initialization::Vacuum;
    vacuum.position_stride = None;
    let result = run_campaign(&vacuum)?;
    let mode_occupation = result
        .pairs
        .iter()
        .map(|p| {
            let mut e = p.intensity_estimate()?;
            e.value += 1.0;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    let output_covariance = match result.spectra.first() {
        Some(s) => Some(s.output_covariance(Pooling::Global)?),
        None => None,
    };
    let max_deviation = mode_occupation
        .iter()
        .map(|e| (e.value - 1.0).abs())
        .fold(0.0, f64::max);
    if !max_deviation.is_finite() {
        return Err(Error::Numerical("non-finite calibration".into()));
    }
    Ok(Calibration {
        mode_occupation,
        output_covariance,
        max_deviation,
        config_hash: result.manifest.config_hash,
    })
}
