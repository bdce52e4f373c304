use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::response::pair_response_kernel;
use super::stream::derive_stream;
use crate::dynamics::{Integrator, IntegratorSettings, Observer};
use crate::error::{Error, Result};
use crate::linear::{find_threshold, pump_steady_state, Threshold, Truncation, DEFAULT_TRUNCATION};
use crate::model::{config_hash, critical_wavenumber, FieldState, Grid, ModelParams, Preset};
use crate::stats::{far_field_scale, pattern_position, Estimate, ModePairMoments, PairProjector, WindowedSpectrum};
use crate::fft::FftPair;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "PCOPO_WORKERS";

/// Pump amplitude, either absolute or as a multiple of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpLevel {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// Vacuum below threshold, relaxed pattern above.
    #[default]
    Auto,
    /// Pump steady state with vacuum-level signal fluctuations.
    Vacuum,
    /// Noise-free relaxation from a stripe at a random position.
    Pattern,
}

/// Noise-free relaxation used to prepare above-threshold states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Relaxation {
    /// Largest pointwise field change per unit time accepted as stationary.
    pub tolerance: f64,
    pub max_time: f64,
    /// Amplitude of the seeded stripe.
    pub seed_amplitude: f64,
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation {
            tolerance: 1e-8,
            max_time: 5000.0,
            seed_amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignSpec {
    pub grid: Grid,
    /// Model parameters; the pump amplitude is replaced according to `pump`.
    pub params: ModelParams,
    pub pump: PumpLevel,
    /// Known threshold for relative pumps; computed when absent.
    pub threshold: Option<f64>,
    pub truncation: Truncation,
    pub settings: IntegratorSettings,
    pub n_trajectories: usize,
    pub burn_in: f64,
    pub measurement: f64,
    /// Integrator steps between samples.
    pub stride: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the environment cap or all cores.
    pub workers: Option<usize>,
    /// Signed mode indices m of the recorded pairs (k_m, −k_m); empty
    /// selects the critical wavenumber.
    pub pair_modes: Vec<i64>,
    /// Samples per window of the zero-frequency spectra; `None` disables them.
    pub spectrum_window: Option<usize>,
    pub record_intensity_spectrum: bool,
    /// Samples between recorded pattern positions of the first pair.
    pub position_stride: Option<usize>,
    pub initialization: Initialization,
    pub relaxation: Relaxation,
    /// Largest tolerated fraction of invalid trajectories.
    pub max_invalid_fraction: f64,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        CampaignSpec::preset(Preset::Opo, PumpLevel::Relative(0.9))
    }
}

impl CampaignSpec {
    pub fn preset(preset: Preset, pump: PumpLevel) -> Self {
        CampaignSpec {
            grid: Preset::default_grid(crate::model::DEFAULT_POINTS).expect("default grid"),
            params: preset.params(0.0),
            pump,
            threshold: None,
            truncation: DEFAULT_TRUNCATION,
            settings: IntegratorSettings::default(),
            n_trajectories: 100,
            burn_in: 100.0,
            measurement: 1000.0,
            stride: 10,
            master_seed: 0,
            workers: None,
            pair_modes: Vec::new(),
            spectrum_window: None,
            record_intensity_spectrum: false,
            position_stride: None,
            initialization: Initialization::Auto,
            relaxation: Relaxation::default(),
            max_invalid_fraction: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        crate::model::validate_config(&self.params, &self.grid)?;
        if self.n_trajectories == 0 {
            return Err(Error::InvalidParameter("at least one trajectory required".into()));
        }
        if !(self.measurement >= 0.0 && self.burn_in >= 0.0) {
            return Err(Error::InvalidParameter("durations must be non-negative".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be positive".into()));
        }
        for &m in &self.pair_modes {
            if m <= 0 || !self.grid.contains_mode(m) || !self.grid.contains_mode(-m) {
                return Err(Error::InvalidParameter(format!("pair mode {m} not on the grid")));
            }
        }
        Ok(())
    }

    /// Time between samples.
    pub fn sample_interval(&self) -> f64 {
        self.stride as f64 * self.settings.dt
    }
}

/// Run-level record of what was computed and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub preset: Option<Preset>,
    pub pump: f64,
    pub threshold: Option<f64>,
    pub master_seed: u64,
    pub n_trajectories: usize,
    pub burn_in: f64,
    pub measurement: f64,
    pub dt: f64,
    pub stride: usize,
    pub workers: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics {
    pub index: usize,
    pub max_pump_abs: f64,
    pub valid: bool,
    pub error: Option<String>,
    /// Time spent in the noise-free relaxation, if any.
    pub relaxation_time: Option<f64>,
}

/// Per-trajectory sums of |a_k|² over all grid modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensitySpectrum {
    pub modes: Vec<i64>,
    pub wavenumbers: Vec<f64>,
    pub sums: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
}

impl IntensitySpectrum {
    fn new(grid: &Grid) -> Self {
        let modes: Vec<i64> = grid.modes().collect();
        IntensitySpectrum {
            wavenumbers: modes.iter().map(|&m| grid.wavenumber(m)).collect(),
            modes,
            sums: Vec::new(),
            counts: Vec::new(),
        }
    }

    fn merge(&mut self, other: &IntensitySpectrum) {
        self.sums.extend_from_slice(&other.sums);
        self.counts.extend_from_slice(&other.counts);
    }

    /// Normally ordered ⟨a_k†a_k⟩ per mode with across-trajectory errors.
    pub fn estimates(&self) -> Result<Vec<Estimate>> {
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientStatistics("no intensity samples".into()));
        }
        (0..self.modes.len())
            .map(|i| {
                let per: Vec<f64> = self
                    .sums
                    .iter()
                    .zip(&self.counts)
                    .filter(|(_, &c)| c > 0)
                    .map(|(s, &c)| s[i] / c as f64 - 1.0)
                    .collect();
                let mut e = Estimate::from_samples(&per)?;
                e.value = self.sums.iter().map(|s| s[i]).sum::<f64>() / total as f64 - 1.0;
                Ok(e)
            })
            .collect()
    }

    /// Wavenumber of the largest intensity.
    pub fn peak(&self) -> Result<f64> {
        let e = self.estimates()?;
        let i = (0..e.len())
            .max_by(|&a, &b| e[a].value.total_cmp(&e[b].value))
            .unwrap_or(0);
        Ok(self.wavenumbers[i])
    }
}

/// Pattern position δ of the first pair, unwrapped in time, per trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionTrack {
    pub interval: f64,
    pub positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub spec: CampaignSpec,
    pub pump: f64,
    pub threshold: Option<Threshold>,
    pub pairs: Vec<ModePairMoments>,
    pub spectra: Vec<WindowedSpectrum>,
    pub intensity_spectrum: Option<IntensitySpectrum>,
    pub positions: Vec<PositionTrack>,
    pub diagnostics: Vec<TrajectoryDiagnostics>,
    pub manifest: Manifest,
}

impl CampaignResult {
    pub fn pair(&self, mode: i64) -> Option<&ModePairMoments> {
        self.pairs.iter().find(|p| p.mode == mode)
    }

    pub fn spectrum(&self, mode: i64) -> Option<&WindowedSpectrum> {
        self.pairs
            .iter()
            .position(|p| p.mode == mode)
            .and_then(|i| self.spectra.get(i))
    }

    pub fn invalid_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| !d.valid).count()
    }

    /// Mean squared displacement of the pattern position against lag time
    /// (from the start of measurement), across trajectories.
    pub fn position_msd(&self) -> Vec<(f64, f64)> {
        let Some(len) = self.positions.iter().map(|t| t.positions.len()).min() else {
            return Vec::new();
        };
        let interval = self.positions[0].interval;
        (0..len)
            .map(|i| {
                let msd = self
                    .positions
                    .iter()
                    .map(|t| (t.positions[i] - t.positions[0]).powi(2))
                    .sum::<f64>()
                    / self.positions.len() as f64;
                (i as f64 * interval, msd)
            })
            .collect()
    }
}

/// Everything one trajectory contributes.
struct TrajectoryOutput {
    pairs: Vec<ModePairMoments>,
    spectra: Vec<WindowedSpectrum>,
    intensity: Option<IntensitySpectrum>,
    position: Option<PositionTrack>,
    diagnostics: TrajectoryDiagnostics,
}

/// Shared, read-only campaign setup.
struct Plan {
    spec: CampaignSpec,
    params: ModelParams,
    modes: Vec<i64>,
    pattern: bool,
    steady: Vec<Complex64>,
    pattern_k: f64,
    /// Commutator kernels about the steady state, when every trajectory
    /// shares that reference.
    shared_kernels: Option<Vec<Vec<Matrix4<f64>>>>,
}

fn worker_count(spec: &CampaignSpec) -> usize {
    let env = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    let n = match (spec.workers, env) {
        (Some(w), Some(cap)) => w.min(cap),
        (Some(w), None) => w,
        (None, Some(cap)) => cap,
        (None, None) => rayon::current_num_threads(),
    };
    n.max(1)
}

/// Resolve the pump amplitude (and threshold, if needed or available).
pub fn resolve_pump(spec: &CampaignSpec) -> Result<(f64, Option<Threshold>)> {
    let needs_threshold = matches!(spec.pump, PumpLevel::Relative(_))
        || (spec.initialization == Initialization::Auto && spec.params.delta1.mean() < 0.0);
    let threshold = match (spec.threshold, needs_threshold) {
        (Some(e), _) => Some(Threshold {
            pump: e,
            wavenumber: critical_wavenumber(spec.params.delta1.mean()).unwrap_or(0.0),
            truncation_warning: false,
        }),
        (None, true) => match find_threshold(&spec.params, &spec.grid, spec.truncation) {
            Ok(t) => Some(t),
            Err(e) if matches!(spec.pump, PumpLevel::Relative(_)) => return Err(e),
            Err(_) => None,
        },
        (None, false) => None,
    };
    let pump = match spec.pump {
        PumpLevel::Absolute(e) => e,
        PumpLevel::Relative(f) => f * threshold.expect("threshold resolved").pump,
    };
    Ok((pump, threshold))
}

fn plan(spec: &CampaignSpec) -> Result<(Plan, f64, Option<Threshold>)> {
    spec.validate()?;
    let (pump, threshold) = resolve_pump(spec)?;
    let params = spec.params.with_pump(pump);
    crate::model::validate_config(&params, &spec.grid)?;
    let pattern = match spec.initialization {
        Initialization::Auto => threshold.is_some_and(|t| pump > t.pump),
        Initialization::Vacuum => false,
        Initialization::Pattern => true,
    };
    let kc = critical_wavenumber(params.delta1.mean());
    let modes = if spec.pair_modes.is_empty() {
        vec![spec.grid.nearest_mode(kc?).max(1)]
    } else {
        spec.pair_modes.clone()
    };
    let pattern_k = spec.grid.wavenumber(modes[0]);
    let steady = pump_steady_state(&params, &spec.grid, Truncation::Grid)?.alpha0_ss;
    let mut plan = Plan {
        spec: spec.clone(),
        params,
        modes,
        pattern,
        steady,
        pattern_k,
        shared_kernels: None,
    };
    if !pattern {
        let mut reference = FieldState::zeros(&spec.grid);
        reference.alpha0 = plan.steady.clone();
        plan.shared_kernels = kernels(&plan, &reference)?;
    }
    Ok((plan, pump, threshold))
}

fn kernels(plan: &Plan, reference: &FieldState) -> Result<Option<Vec<Vec<Matrix4<f64>>>>> {
    let Some(window) = plan.spec.spectrum_window else {
        return Ok(None);
    };
    plan.modes
        .iter()
        .map(|&m| {
            pair_response_kernel(
                reference,
                &plan.params,
                &plan.spec.grid,
                plan.spec.settings,
                m,
                plan.spec.stride,
                window,
            )
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Run all trajectories and merge their accumulators in trajectory order.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignResult> {
    let (plan, pump, threshold) = plan(spec)?;
    let workers = worker_count(spec);
    let run = |i: usize| run_trajectory(&plan, i);
    let outputs: Vec<Result<TrajectoryOutput>> = if workers == 1 {
        (0..spec.n_trajectories).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        pool.install(|| (0..spec.n_trajectories).into_par_iter().map(run).collect())
    };

    let interval = spec.sample_interval();
    let mut result = CampaignResult {
        spec: spec.clone(),
        pump,
        threshold,
        pairs: plan
            .modes
            .iter()
            .map(|&m| ModePairMoments::new(m, spec.grid.wavenumber(m)))
            .collect(),
        spectra: match spec.spectrum_window {
            Some(w) => plan.modes.iter().map(|_| WindowedSpectrum::new(w, interval)).collect(),
            None => Vec::new(),
        },
        intensity_spectrum: spec.record_intensity_spectrum.then(|| IntensitySpectrum::new(&spec.grid)),
        positions: Vec::new(),
        diagnostics: Vec::with_capacity(spec.n_trajectories),
        manifest: Manifest {
            config_hash: config_hash(&spec.grid, &plan.params),
            preset: Preset::identify(&plan.params.delta0, &plan.params.delta1),
            pump,
            threshold: threshold.map(|t| t.pump),
            master_seed: spec.master_seed,
            n_trajectories: spec.n_trajectories,
            burn_in: spec.burn_in,
            measurement: spec.measurement,
            dt: spec.settings.dt,
            stride: spec.stride,
            workers,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    for out in outputs {
        let out = out?;
        if out.diagnostics.valid {
            for (acc, p) in result.pairs.iter_mut().zip(&out.pairs) {
                acc.merge(p);
            }
            for (acc, s) in result.spectra.iter_mut().zip(&out.spectra) {
                acc.merge(s);
            }
            if let (Some(acc), Some(i)) = (result.intensity_spectrum.as_mut(), &out.intensity) {
                acc.merge(i);
            }
            result.positions.extend(out.position);
        }
        result.diagnostics.push(out.diagnostics);
    }
    let invalid = result.invalid_count();
    if invalid as f64 > spec.max_invalid_fraction * spec.n_trajectories as f64 {
        let first = result
            .diagnostics
            .iter()
            .find(|d| !d.valid)
            .and_then(|d| d.error.clone())
            .unwrap_or_default();
        return Err(Error::CampaignAborted(format!(
            "{invalid} of {} trajectories invalid (first: {first})",
            spec.n_trajectories
        )));
    }
    Ok(result)
}

/// Vacuum-level Q fluctuations of the signal: ⟨|α1|²⟩ = ε/dx per cell.
fn vacuum_signal(grid: &Grid, params: &ModelParams, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let s = (0.5 * params.noise.epsilon / grid.dx()).sqrt();
    (0..grid.n_points())
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex64::new(a, b) * s
        })
        .collect()
}

/// Integrate without noise from a stripe at a random position until the
/// state stops changing. Returns the relaxation time.
fn relax(plan: &Plan, state: &mut FieldState, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = &plan.spec.grid;
    let relax = plan.spec.relaxation;
    let k = plan.pattern_k;
    let offset = rng.random::<f64>() * 2.0 * PI / k;
    for j in 0..grid.n_points() {
        state.alpha1[j] = Complex64::new(relax.seed_amplitude * (k * (grid.x(j) - offset)).cos(), 0.0);
    }
    let mut quiet = plan.params.clone();
    quiet.noise.enabled = false;
    let mut integrator = Integrator::new(&quiet, grid, plan.spec.settings)?;
    let unit = (1.0 / plan.spec.settings.dt).round().max(1.0) as usize;
    let span = unit as f64 * plan.spec.settings.dt;
    let mut t = 0.0;
    while t < relax.max_time {
        let before = state.clone();
        integrator.advance(state, unit, rng)?;
        t += span;
        let change = before
            .alpha0
            .iter()
            .zip(&state.alpha0)
            .chain(before.alpha1.iter().zip(&state.alpha1))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / span;
        if change < relax.tolerance {
            return Ok(t);
        }
    }
    Err(Error::Numerical(format!(
        "pattern did not relax within t = {}",
        relax.max_time
    )))
}

struct Recorder<'a> {
    projectors: Vec<PairProjector>,
    pairs: Vec<ModePairMoments>,
    spectra: Vec<WindowedSpectrum>,
    intensity: Option<(IntensitySpectrum, FftPair, f64, Vec<Complex64>)>,
    position: Option<(usize, usize, PositionTrack)>,
    plan: &'a Plan,
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, state: &FieldState) -> Result<()> {
        let mut first = None;
        for (i, proj) in self.projectors.iter().enumerate() {
            let (p, m) = proj.project(&state.alpha1);
            self.pairs[i].push(p, m);
            if let Some(s) = self.spectra.get_mut(i) {
                s.push(p, m);
            }
            if i == 0 {
                first = Some((p, m));
            }
        }
        if let Some((spec, fft, scale, buf)) = self.intensity.as_mut() {
            buf.copy_from_slice(&state.alpha1);
            fft.forward(buf);
            let grid = &self.plan.spec.grid;
            let sums = spec.sums.last_mut().expect("trajectory started");
            for (i, &m) in spec.modes.iter().enumerate() {
                sums[i] += (buf[grid.mode_bin(m)] * *scale).norm_sqr();
            }
            *spec.counts.last_mut().expect("trajectory started") += 1;
        }
        if let (Some((every, seen, track)), Some((p, m))) = (self.position.as_mut(), first) {
            if *seen % *every == 0 {
                let k = self.plan.pattern_k;
                let d = pattern_position(p, m, k);
                let half = PI / k;
                let d = match track.positions.last() {
                    Some(&prev) => prev + (d - prev + 0.5 * half).rem_euclid(half) - 0.5 * half,
                    None => d,
                };
                track.positions.push(d);
            }
            *seen += 1;
        }
        Ok(())
    }
}

fn run_trajectory(plan: &Plan, index: usize) -> Result<TrajectoryOutput> {
    let spec = &plan.spec;
    let grid = &spec.grid;
    let mut rng = derive_stream(spec.master_seed, index as u64);
    let mut diagnostics = TrajectoryDiagnostics {
        index,
        max_pump_abs: 0.0,
        valid: true,
        error: None,
        relaxation_time: None,
    };
    let mut state = FieldState::zeros(grid);
    state.alpha0 = plan.steady.clone();

    let mut kernels = plan.shared_kernels.clone();
    if plan.pattern {
        diagnostics.relaxation_time = Some(relax(plan, &mut state, &mut rng)?);
        if kernels.is_none() {
            kernels = self::kernels(plan, &state)?;
        }
    } else {
        state.alpha1 = vacuum_signal(grid, &plan.params, &mut rng);
    }
    state.time = 0.0;

    let projectors: Vec<PairProjector> = plan
        .modes
        .iter()
        .map(|&m| PairProjector::new(grid, &plan.params, m))
        .collect();
    let mut recorder = Recorder {
        projectors,
        pairs: plan
            .modes
            .iter()
            .map(|&m| {
                let mut p = ModePairMoments::new(m, grid.wavenumber(m));
                p.start_trajectory();
                p
            })
            .collect(),
        spectra: Vec::new(),
        intensity: None,
        position: spec.position_stride.map(|every| {
            (
                every.max(1),
                0,
                PositionTrack {
                    interval: every.max(1) as f64 * spec.sample_interval(),
                    positions: Vec::new(),
                },
            )
        }),
        plan,
    };
    if let (Some(w), Some(ks)) = (spec.spectrum_window, kernels.as_ref()) {
        for k in ks {
            let mut s = WindowedSpectrum::new(w, spec.sample_interval());
            s.start_trajectory(k)?;
            recorder.spectra.push(s);
        }
    }
    if spec.record_intensity_spectrum {
        let mut s = IntensitySpectrum::new(grid);
        s.sums.push(vec![0.0; s.modes.len()]);
        s.counts.push(0);
        recorder.intensity = Some((
            s,
            FftPair::new(grid.n_points()),
            far_field_scale(grid, &plan.params),
            vec![Complex64::new(0.0, 0.0); grid.n_points()],
        ));
    }

    let mut integrator = Integrator::new(&plan.params, grid, spec.settings)?;
    let outcome = integrator
        .integrate(&mut state, spec.burn_in, spec.stride, &mut rng, &mut [])
        .and_then(|_| {
            integrator.integrate(
                &mut state,
                spec.measurement,
                spec.stride,
                &mut rng,
                &mut [&mut recorder],
            )
        });
    diagnostics.max_pump_abs = integrator.max_pump_abs();
    match outcome {
        Ok(()) => {}
        Err(e @ (Error::OutOfValidity { .. } | Error::BlowUp { .. } | Error::NonFinite(_))) => {
            diagnostics.valid = false;
            diagnostics.error = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    if integrator.out_of_validity() {
        diagnostics.valid = false;
        diagnostics.error.get_or_insert_with(|| "pump left the validity domain".into());
    }
    Ok(TrajectoryOutput {
        pairs: recorder.pairs,
        spectra: recorder.spectra,
        intensity: recorder.intensity.map(|(s, ..)| s),
        position: recorder.position.map(|(.., t)| t),
        diagnostics,
    })
}
