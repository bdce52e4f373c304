//! Physical configuration of the oscillator: transverse grid, detuning
//! profiles, drive and noise parameters, and the named configurations used
//! throughout (homogeneous OPO and the three photonic-crystal variants).

mod detuning;
mod grid;
mod state;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use detuning::DetuningProfile;
pub use grid::Grid;
pub use state::FieldState;

use crate::error::{Error, Result};

/// Modulation depth of the photonic-crystal presets.
pub const PRESET_MODULATION: f64 = 0.5;
/// Mean signal detuning of all presets.
pub const PRESET_SIGNAL_DETUNING: f64 = -1.0;
/// Pattern periods in the default domain.
pub const DEFAULT_PERIODS: usize = 16;
pub const DEFAULT_POINTS: usize = 128;

/// Wavenumber of the first off-axis instability, √(−Δ̄1/2).
pub fn critical_wavenumber(delta1_mean: f64) -> Result<f64> {
    if !(delta1_mean < 0.0) {
        return Err(Error::NoOffAxisInstability(delta1_mean));
    }
    Ok((-delta1_mean / 2.0).sqrt())
}

/// Correlators of the Langevin noise, in units of the noise strength ε:
/// ⟨ξ0 ξ0*⟩ = ε·pump_normal, ⟨ξ0 ξ0⟩ = 0, ⟨ξ1 ξ1*⟩ = ε·normal,
/// ⟨ξ1 ξ1⟩ = ε·anomalous·α0 (all per unit time and per unit length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub epsilon: f64,
    pub enabled: bool,
    pub pump_normal: f64,
    pub normal: f64,
    pub anomalous: Complex64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            epsilon: 1e-2,
            enabled: true,
            pump_normal: 2.0,
            normal: 2.0,
            // Q-representation sign of the phase-sensitive diffusion
            anomalous: Complex64::new(-1.0, 0.0),
        }
    }
}

impl NoiseConfig {
    /// Largest |α0| for which the signal diffusion matrix stays positive.
    pub fn validity_limit(&self) -> f64 {
        if self.anomalous.norm() == 0.0 {
            f64::INFINITY
        } else {
            self.normal / self.anomalous.norm()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Input field E.
    pub pump: f64,
    pub delta0: DetuningProfile,
    pub delta1: DetuningProfile,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Parametric coupling (α1²/2 and α0α1* terms). Off only for vacuum
    /// calibration runs.
    #[serde(default = "yes")]
    pub parametric: bool,
}

fn yes() -> bool {
    true
}

impl ModelParams {
    pub fn with_pump(&self, pump: f64) -> Self {
        ModelParams {
            pump,
            ..self.clone()
        }
    }

    pub fn is_modulated(&self) -> bool {
        self.delta0.is_modulated() || self.delta1.is_modulated()
    }

    /// Vacuum-reference variant: no drive, no parametric coupling, same
    /// detunings and noise.
    pub fn vacuum(&self) -> Self {
        ModelParams {
            pump: 0.0,
            parametric: false,
            ..self.clone()
        }
    }
}

/// The four named configurations of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Opo,
    PcSignal,
    PcPump,
    PcBoth,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Opo, Preset::PcSignal, Preset::PcPump, Preset::PcBoth];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Opo => "opo",
            Preset::PcSignal => "pc-signal",
            Preset::PcPump => "pc-pump",
            Preset::PcBoth => "pc-both",
        }
    }

    /// Crystal wavenumber k_pc = 2k_c.
    pub fn crystal_wavenumber() -> f64 {
        2.0 * critical_wavenumber(PRESET_SIGNAL_DETUNING).expect("negative preset detuning")
    }

    pub fn params(self, pump: f64) -> ModelParams {
        let kpc = Self::crystal_wavenumber();
        let modulated = |mean: f64| DetuningProfile::sinusoidal(mean, PRESET_MODULATION, kpc, 0.0);
        let (delta0, delta1) = match self {
            Preset::Opo => (
                DetuningProfile::uniform(0.0),
                DetuningProfile::uniform(PRESET_SIGNAL_DETUNING),
            ),
            Preset::PcSignal => (
                DetuningProfile::uniform(0.0),
                modulated(PRESET_SIGNAL_DETUNING),
            ),
            Preset::PcPump => (modulated(0.0), DetuningProfile::uniform(PRESET_SIGNAL_DETUNING)),
            Preset::PcBoth => (modulated(0.0), modulated(PRESET_SIGNAL_DETUNING)),
        };
        ModelParams {
            pump,
            delta0,
            delta1,
            noise: NoiseConfig::default(),
            parametric: true,
        }
    }

    /// Default domain: 16 periods of the critical wavenumber.
    pub fn default_grid(n_points: usize) -> Result<Grid> {
        let kc = critical_wavenumber(PRESET_SIGNAL_DETUNING)?;
        Grid::with_periods(n_points, kc, DEFAULT_PERIODS)
    }

    /// Identify a preset from (normalized) detuning profiles.
    pub fn identify(delta0: &DetuningProfile, delta1: &DetuningProfile) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| {
            let q = p.params(0.0);
            q.delta0.normalized() == delta0.normalized() && q.delta1.normalized() == delta1.normalized()
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset '{s}'")))
    }
}

/// Parameters validated against a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckedConfig {
    pub grid: Grid,
    pub params: ModelParams,
    pub preset: Option<Preset>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl CheckedConfig {
    /// SHA-256 of the canonical JSON of grid and parameters.
    pub fn hash(&self) -> String {
        config_hash(&self.grid, &self.params)
    }
}

pub fn config_hash(grid: &Grid, params: &ModelParams) -> String {
    let json = serde_json::to_string(&(grid, params)).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn validate_config(params: &ModelParams, grid: &Grid) -> Result<CheckedConfig> {
    if !(params.pump.is_finite() && params.pump >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pump amplitude must be a non-negative number, got {}",
            params.pump
        )));
    }
    let eps = params.noise.epsilon;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise strength must be positive, got {eps}"
        )));
    }
    if params.noise.normal < 0.0 || params.noise.pump_normal < 0.0 {
        return Err(Error::InvalidParameter(
            "noise normal correlators must be non-negative".into(),
        ));
    }
    let mut normalized = params.clone();
    normalized.delta0 = params.delta0.normalized();
    normalized.delta1 = params.delta1.normalized();
    for profile in [&normalized.delta0, &normalized.delta1] {
        if let DetuningProfile::Sinusoidal { amplitude, .. } = profile {
            if *amplitude < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "modulation amplitude must be non-negative, got {amplitude}"
                )));
            }
        }
        // commensurability and sample-count checks
        profile.harmonics(grid)?;
    }

    let mut warnings = Vec::new();
    let preset = Preset::identify(&normalized.delta0, &normalized.delta1);
    let d1 = normalized.delta1.sample(grid);
    if normalized.delta1.mean() < 0.0 && d1.iter().any(|&v| v >= 0.0) {
        warnings.push(format!(
            "signal detuning changes sign across the domain (max {:.3})",
            d1.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        ));
    }
    Ok(CheckedConfig {
        grid: grid.clone(),
        params: normalized,
        preset,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_wavenumber_values() {
        assert!((critical_wavenumber(-1.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(critical_wavenumber(-2.0).unwrap(), 1.0);
        assert!(matches!(
            critical_wavenumber(0.5),
            Err(Error::NoOffAxisInstability(_))
        ));
        assert!(critical_wavenumber(0.0).is_err());
        for d in [-0.3, -1.0, -2.0, -7.5] {
            let k = critical_wavenumber(d).unwrap();
            assert!((k * k * 2.0 + d).abs() <= 2.0 * f64::EPSILON * d.abs());
        }
    }

    #[test]
    fn presets_validate_and_identify() {
        let grid = Preset::default_grid(128).unwrap();
        for p in Preset::ALL {
            let c = validate_config(&p.params(0.9), &grid).unwrap();
            assert_eq!(c.preset, Some(p));
            assert!(c.warnings.is_empty(), "{p}: {:?}", c.warnings);
        }
        let kc = critical_wavenumber(-1.0).unwrap();
        assert_eq!(grid.commensurate_mode(kc), Some(16));
        assert_eq!(grid.commensurate_mode(2.0 * kc), Some(32));
    }

    #[test]
    fn incommensurate_crystal_rejected() {
        let grid = Grid::new(64, 2.0 * std::f64::consts::PI / 0.1).unwrap();
        let mut p = Preset::PcPump.params(0.9);
        p.delta0 = DetuningProfile::sinusoidal(0.0, 0.5, 1.37, 0.0);
        assert!(matches!(
            validate_config(&p, &grid),
            Err(Error::Incommensurate { .. })
        ));
    }

    #[test]
    fn unresolved_crystal_rejected() {
        // 16 pattern periods on 64 points puts k_pc on the Nyquist mode
        let grid = Preset::default_grid(64).unwrap();
        assert!(validate_config(&Preset::PcPump.params(0.9), &grid).is_err());
    }

    #[test]
    fn negative_epsilon_rejected() {
        let grid = Preset::default_grid(64).unwrap();
        let mut p = Preset::Opo.params(0.5);
        p.noise.epsilon = -1e-3;
        assert!(validate_config(&p, &grid).is_err());
    }

    #[test]
    fn sign_change_is_a_warning() {
        let grid = Preset::default_grid(128).unwrap();
        let mut p = Preset::PcSignal.params(0.5);
        p.delta1 = DetuningProfile::sinusoidal(-1.0, 1.5, Preset::crystal_wavenumber(), 0.0);
        let c = validate_config(&p, &grid).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(c.preset, None);
    }

    #[test]
    fn zero_modulation_hashes_like_opo() {
        let grid = Preset::default_grid(128).unwrap();
        let mut p = Preset::PcBoth.params(0.9);
        for d in [&mut p.delta0, &mut p.delta1] {
            if let DetuningProfile::Sinusoidal { amplitude, .. } = d {
                *amplitude = 0.0;
            }
        }
        let a = validate_config(&p, &grid).unwrap();
        let b = validate_config(&Preset::Opo.params(0.9), &grid).unwrap();
        assert_eq!(a.preset, Some(Preset::Opo));
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn preset_names_roundtrip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.name()));
        }
    }
}
