//! Run configuration: a JSON document with a preset shortcut, explicit
//! model keys and campaign/analysis settings, plus dotted-path overrides
//! such as `pump.E=0.9` applied before parsing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::IntegratorSettings;
use crate::ensemble::{CampaignSpec, Initialization, PumpLevel, Relaxation};
use crate::error::{Error, Result};
use crate::linear::{Truncation, DEFAULT_TRUNCATION};
use crate::model::{
    validate_config, CheckedConfig, DetuningProfile, Grid, ModelParams, NoiseConfig, Preset, DEFAULT_POINTS,
};
use crate::stats::DEFAULT_ANGLE_POINTS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Domain length; defaults to 16 periods of the critical wavenumber.
    pub length: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: DEFAULT_POINTS,
            length: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpConfig {
    /// Absolute input field.
    #[serde(rename = "E")]
    pub e: Option<f64>,
    /// Input field as a multiple of the threshold; ignored when `E` is set.
    pub relative: Option<f64>,
}

/// Partial detuning profile; unset keys keep the preset's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetuningConfig {
    pub mean: Option<f64>,
    pub amplitude: Option<f64>,
    pub k: Option<f64>,
    pub phase: Option<f64>,
}

impl DetuningConfig {
    fn apply(&self, base: &DetuningProfile) -> Result<DetuningProfile> {
        if *self == DetuningConfig::default() {
            return Ok(base.clone());
        }
        match base {
            DetuningProfile::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => Ok(DetuningProfile::sinusoidal(
                self.mean.unwrap_or(*mean),
                self.amplitude.unwrap_or(*amplitude),
                self.k.unwrap_or(*wavenumber),
                self.phase.unwrap_or(*phase),
            )),
            DetuningProfile::Sampled { .. } => Err(Error::InvalidParameter(
                "sampled detuning profiles cannot be edited key by key".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub n_trajectories: usize,
    /// Burn-in and measurement durations below threshold.
    pub burn_in: f64,
    pub measurement: f64,
    /// Measurement duration above threshold.
    pub measurement_above: f64,
    pub stride: usize,
    pub master_seed: u64,
    pub workers: Option<usize>,
    /// Window of the zero-frequency spectra, in time units.
    pub spectrum_window: f64,
    pub spectrum_window_above: f64,
    pub relaxation: Relaxation,
    pub max_invalid_fraction: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            n_trajectories: 100,
            burn_in: 50.0,
            measurement: 1000.0,
            measurement_above: 5000.0,
            stride: 2,
            master_seed: 1,
            workers: None,
            spectrum_window: 20.0,
            spectrum_window_above: 50.0,
            relaxation: Relaxation::default(),
            max_invalid_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Weight of the second mode in the joint quadrature.
    pub lambda: f64,
    /// Weight in the inseparability sum.
    pub insep_a: f64,
    /// Standard errors required for a cell to count as beyond a boundary.
    pub significance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            theta_points: DEFAULT_ANGLE_POINTS,
            phi_points: DEFAULT_ANGLE_POINTS,
            lambda: 1.0,
            insep_a: 1.0,
            significance: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    /// Relative pumps of the oracle curves of the intensity-vs-E figure.
    pub fig1_oracle: Vec<f64>,
    /// Relative pumps of its simulation points.
    pub fig1_points: Vec<f64>,
    /// Absolute pump of the far-field spectrum figure.
    pub fig1_spectrum_pump: f64,
    pub below: f64,
    pub above: f64,
    pub presets: Vec<Preset>,
    /// Presets of the entanglement maps.
    pub map_presets: Vec<Preset>,
}

impl Default for FigureConfig {
    fn default() -> Self {
        FigureConfig {
            fig1_oracle: (1..=39).map(|i| i as f64 * 0.025).collect(),
            fig1_points: vec![0.5, 0.7, 0.9],
            fig1_spectrum_pump: 0.9,
            below: 0.95,
            above: 1.02,
            presets: Preset::ALL.to_vec(),
            map_presets: vec![Preset::Opo, Preset::PcPump],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub grid: GridConfig,
    pub pump: PumpConfig,
    pub delta0: DetuningConfig,
    pub delta1: DetuningConfig,
    pub noise: NoiseConfig,
    pub parametric: bool,
    pub truncation: Truncation,
    pub integrator: IntegratorSettings,
    pub campaign: CampaignConfig,
    pub analysis: AnalysisConfig,
    pub figures: FigureConfig,
    /// Parent of the run directories.
    pub output: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::Opo,
            grid: GridConfig::default(),
            pump: PumpConfig::default(),
            delta0: DetuningConfig::default(),
            delta1: DetuningConfig::default(),
            noise: NoiseConfig::default(),
            parametric: true,
            truncation: DEFAULT_TRUNCATION,
            integrator: IntegratorSettings::default(),
            campaign: CampaignConfig::default(),
            analysis: AnalysisConfig::default(),
            figures: FigureConfig::default(),
            output: "runs".into(),
        }
    }
}

/// Set `path` (dot-separated keys) in a JSON object, creating objects on
/// the way. The value is parsed as JSON when possible, else kept as a string.
pub fn apply_override(doc: &mut Value, path: &str, raw: &str) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::InvalidParameter(format!("malformed override key '{path}'")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for (i, key) in keys.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Map::new());
            } else {
                return Err(Error::InvalidParameter(format!(
                    "override '{path}': '{}' is not an object",
                    keys[..i].join(".")
                )));
            }
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

/// Split `key=value` override arguments (a leading `--` is accepted).
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let arg = arg.trim_start_matches("--");
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(Error::InvalidParameter(format!("override '{arg}' is not key=value"))),
    }
}

fn config_error(e: serde_json::Error) -> Error {
    Error::InvalidParameter(format!("configuration: {e}"))
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self> {
        let doc = if doc.is_null() { Value::Object(Map::new()) } else { doc };
        serde_json::from_value(doc).map_err(config_error)
    }

    /// Parse a configuration document and apply the overrides in order.
    pub fn from_json(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut doc: Value = if text.trim().is_empty() {
            Value::Object(Map::new())
        } else {
            serde_json::from_str(text).map_err(config_error)?
        };
        for (k, v) in overrides {
            apply_override(&mut doc, k, v)?;
        }
        Self::from_value(doc)
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Self::from_json(&text, overrides)
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.grid.length {
            Some(l) => Grid::new(self.grid.n, l),
            None => Preset::default_grid(self.grid.n),
        }
    }

    /// Model parameters of `preset` with this configuration's explicit keys
    /// applied; the pump is taken from `pump.E` (0 if unset).
    pub fn params_for(&self, preset: Preset) -> Result<ModelParams> {
        let base = preset.params(self.pump.e.unwrap_or(0.0));
        Ok(ModelParams {
            pump: base.pump,
            delta0: self.delta0.apply(&base.delta0)?,
            delta1: self.delta1.apply(&base.delta1)?,
            noise: self.noise,
            parametric: self.parametric,
        })
    }

    pub fn params(&self) -> Result<ModelParams> {
        self.params_for(self.preset)
    }

    pub fn checked(&self) -> Result<CheckedConfig> {
        validate_config(&self.params()?, &self.grid()?)
    }

    /// Pump level of the configured preset: absolute `E`, else relative.
    pub fn pump_level(&self) -> Result<PumpLevel> {
        match (self.pump.e, self.pump.relative) {
            (Some(e), _) => Ok(PumpLevel::Absolute(e)),
            (None, Some(f)) => Ok(PumpLevel::Relative(f)),
            (None, None) => Err(Error::InvalidParameter("set pump.E or pump.relative".into())),
        }
    }

    /// Campaign for `preset` at `pump`, sized for the regime: above
    /// threshold uses the longer measurement and window.
    pub fn campaign(&self, preset: Preset, pump: PumpLevel, above: bool) -> Result<CampaignSpec> {
        let c = &self.campaign;
        let dt = self.integrator.dt;
        let interval = c.stride as f64 * dt;
        let window = if above { c.spectrum_window_above } else { c.spectrum_window };
        Ok(CampaignSpec {
            grid: self.grid()?,
            params: self.params_for(preset)?,
            pump,
            threshold: None,
            truncation: self.truncation,
            settings: self.integrator,
            n_trajectories: c.n_trajectories,
            burn_in: c.burn_in,
            measurement: if above { c.measurement_above } else { c.measurement },
            stride: c.stride,
            master_seed: c.master_seed,
            workers: c.workers,
            pair_modes: Vec::new(),
            spectrum_window: Some(((window / interval).round() as usize).max(1)),
            record_intensity_spectrum: false,
            position_stride: None,
            initialization: Initialization::Auto,
            relaxation: c.relaxation,
            max_invalid_fraction: c.max_invalid_fraction,
        })
    }
}
