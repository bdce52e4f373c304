//! Tabular datasets behind the threshold table and the noise figures:
//! intensity against pump and against wavenumber, variance against
//! quadrature angle, and entanglement maps. Each dataset carries the
//! provenance of the campaigns it was computed from and round-trips
//! losslessly through CSV and JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{AnalysisConfig, RunConfig};
use crate::ensemble::{run_campaign, CampaignResult, PumpLevel};
use crate::error::{Error, Result};
use crate::linear::{find_threshold, intensity_spectrum, pair_covariance, pump_steady_state, Threshold, Truncation};
use crate::model::{critical_wavenumber, ModelParams, Preset};
use crate::stats::{
    angle_grid, angle_scan, angle_scan_errors, best_phi, jackknife_error, shot_noise, theta_scan, AngleMap,
    Criterion, Estimate, Pooling, QuadratureCovariance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureId {
    Threshold,
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Threshold => "threshold",
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
        }
    }
}

/// One table cell; non-finite numbers are stored as missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn num(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Missing
        }
    }

    fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn parse_csv(s: &str) -> Cell {
        if s.is_empty() {
            Cell::Missing
        } else {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() && !s.chars().any(|c| c.is_ascii_alphabetic() && c != 'e') => Cell::Num(v),
                _ => Cell::Text(s.to_string()),
            }
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

/// Where a group of rows came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub preset: Option<Preset>,
    pub label: String,
    pub pump: f64,
    pub threshold: Option<f64>,
    pub master_seed: Option<u64>,
    pub n_trajectories: usize,
    pub burn_in: f64,
    pub measurement: f64,
    pub dt: f64,
    pub epsilon: f64,
    pub config_hash: String,
}

impl Provenance {
    fn from_campaign(label: &str, r: &CampaignResult) -> Self {
        Provenance {
            preset: r.manifest.preset,
            label: label.to_string(),
            pump: r.pump,
            threshold: r.manifest.threshold,
            master_seed: Some(r.manifest.master_seed),
            n_trajectories: r.manifest.n_trajectories,
            burn_in: r.manifest.burn_in,
            measurement: r.manifest.measurement,
            dt: r.manifest.dt,
            epsilon: r.spec.params.noise.epsilon,
            config_hash: r.manifest.config_hash.clone(),
        }
    }

    fn analytic(label: &str, preset: Preset, params: &ModelParams, threshold: Option<f64>, cfg: &RunConfig) -> Result<Self> {
        Ok(Provenance {
            preset: Some(preset),
            label: label.to_string(),
            pump: params.pump,
            threshold,
            master_seed: None,
            n_trajectories: 0,
            burn_in: 0.0,
            measurement: 0.0,
            dt: cfg.integrator.dt,
            epsilon: params.noise.epsilon,
            config_hash: crate::model::config_hash(&cfg.grid()?, params),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureDataset {
    pub id: FigureId,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Vec<Provenance>,
    /// Scalar summaries (extrema, their coordinates, set measures).
    pub notes: BTreeMap<String, f64>,
}

const PROVENANCE_TAG: &str = "# provenance: ";
const NOTES_TAG: &str = "# notes: ";
const ID_TAG: &str = "# id: ";

impl FigureDataset {
    fn new(id: FigureId, columns: &[&str]) -> Self {
        FigureDataset {
            id,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            provenance: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    fn note(&mut self, key: String, v: f64) {
        if v.is_finite() {
            self.notes.insert(key, v);
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with the identifier, provenance and notes in leading comment lines.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "{ID_TAG}{}", self.id.name());
        let _ = writeln!(out, "{PROVENANCE_TAG}{}", serde_json::to_string(&self.provenance)?);
        let _ = writeln!(out, "{NOTES_TAG}{}", serde_json::to_string(&self.notes)?);
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            for cell in row {
                if let Cell::Text(t) = cell {
                    if Cell::parse_csv(t) != *cell || t.contains([',', '\n', '\r']) {
                        return Err(Error::InvalidParameter(format!("text cell '{t}' cannot be written as CSV")));
                    }
                }
            }
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameter(format!("dataset CSV: {m}"));
        let mut lines = text.lines();
        let mut header = |tag: &str| -> Result<String> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(tag))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("missing '{}' line", tag.trim())))
        };
        let id: FigureId = serde_json::from_value(serde_json::Value::String(header(ID_TAG)?))?;
        let provenance = serde_json::from_str(&header(PROVENANCE_TAG)?)?;
        let notes = serde_json::from_str(&header(NOTES_TAG)?)?;
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| bad("missing column header"))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| {
                let row: Vec<Cell> = l.split(',').map(Cell::parse_csv).collect();
                if row.len() == columns.len() {
                    Ok(row)
                } else {
                    Err(bad("row width differs from header"))
                }
            })
            .collect::<Result<_>>()?;
        Ok(FigureDataset {
            id,
            columns,
            rows,
            provenance,
            notes,
        })
    }

    /// Write `<id>.csv` and `<id>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.id.name()));
        let json = dir.join(format!("{}.json", self.id.name()));
        std::fs::write(&csv, self.to_csv()?)?;
        std::fs::write(&json, self.to_json()?)?;
        Ok(vec![csv, json])
    }
}

/// Run directory `<output>/<config hash prefix>-<seed>`.
pub fn run_directory(cfg: &RunConfig) -> Result<PathBuf> {
    let doc = serde_json::to_string(cfg)?;
    let hash = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(doc.as_bytes()))
    };
    Ok(Path::new(&cfg.output).join(format!("{}-{}", &hash[..12], cfg.campaign.master_seed)))
}

fn preset_threshold(cfg: &RunConfig, preset: Preset) -> Result<(ModelParams, Threshold)> {
    let params = cfg.params_for(preset)?;
    let t = find_threshold(&params, &cfg.grid()?, cfg.truncation)?;
    Ok((params, t))
}

/// Threshold table of the four presets under the configuration's overrides.
pub fn threshold_table(cfg: &RunConfig) -> Result<Vec<(Preset, Threshold)>> {
    Preset::ALL
        .into_iter()
        .map(|p| preset_threshold(cfg, p).map(|(_, t)| (p, t)))
        .collect()
}

pub fn cmd_threshold(cfg: &RunConfig) -> Result<FigureDataset> {
    let mut ds = FigureDataset::new(FigureId::Threshold, &["preset", "threshold", "wavenumber", "truncation_warning"]);
    for (p, t) in threshold_table(cfg)? {
        ds.rows.push(vec![
            Cell::text(p.name()),
            Cell::num(t.pump),
            Cell::num(t.wavenumber),
            Cell::num(if t.truncation_warning { 1.0 } else { 0.0 }),
        ]);
        let params = cfg.params_for(p)?.with_pump(t.pump);
        ds.provenance.push(Provenance::analytic("threshold", p, &params, Some(t.pump), cfg)?);
    }
    Ok(ds)
}

/// Normally ordered ⟨a†(k_c)a(k_c)⟩ of the linearized theory.
pub fn oracle_intensity(params: &ModelParams, cfg: &RunConfig) -> Result<f64> {
    let grid = cfg.grid()?;
    let ss = pump_steady_state(params, &grid, Truncation::Grid)?;
    let m = grid.nearest_mode(critical_wavenumber(params.delta1.mean())?);
    let pc = pair_covariance(grid.wavenumber(m), &ss, params, &grid)?;
    Ok(0.5 * (pc.intensity[0] + pc.intensity[1]))
}

/// Simulated point of the intensity-against-pump figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityPoint {
    pub preset: Preset,
    pub fraction: f64,
    pub pump: f64,
    pub threshold: f64,
    pub oracle: f64,
    pub simulated: Estimate,
    /// ⟨a(±k_c)²⟩ as `[mode][re, im]`.
    pub anomalous: [[Estimate; 2]; 2],
    pub oracle_anomalous: [[f64; 2]; 2],
    pub provenance: Provenance,
}

/// Simulated intensity at `fraction`·E_th compared with the oracle.
pub fn intensity_point(cfg: &RunConfig, preset: Preset, fraction: f64, threshold: Option<f64>) -> Result<IntensityPoint> {
    let mut spec = cfg.campaign(preset, PumpLevel::Relative(fraction), false)?;
    spec.spectrum_window = None;
    spec.threshold = threshold;
    let r = run_campaign(&spec)?;
    let pair = &r.pairs[0];
    let params = spec.params.with_pump(r.pump);
    let grid = cfg.grid()?;
    let ss = pump_steady_state(&params, &grid, Truncation::Grid)?;
    let pc = pair_covariance(pair.k, &ss, &params, &grid)?;
    let sol = crate::linear::stationary_covariance(-pair.k, &ss, &params, &grid, &[])?;
    let am = sol.anomalous(-pair.k);
    Ok(IntensityPoint {
        preset,
        fraction,
        pump: r.pump,
        threshold: r.threshold.map_or(f64::NAN, |t| t.pump),
        oracle: 0.5 * (pc.intensity[0] + pc.intensity[1]),
        simulated: pair.intensity_estimate()?,
        anomalous: pair.anomalous_estimate()?,
        oracle_anomalous: [[pc.anomalous.re, pc.anomalous.im], [am.re, am.im]],
        provenance: Provenance::from_campaign("simulation", &r),
    })
}

/// Far-field intensity spectrum at an absolute pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensitySpectrumCurve {
    pub preset: Preset,
    pub pump: f64,
    pub wavenumbers: Vec<f64>,
    pub oracle: Vec<f64>,
    pub simulated: Vec<Estimate>,
    pub provenance: Provenance,
}

impl IntensitySpectrumCurve {
    /// Wavenumber of the largest simulated intensity among k > 0.
    pub fn peak(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        for (k, e) in self.wavenumbers.iter().zip(&self.simulated) {
            if *k > 0.0 && e.value > best.0 {
                best = (e.value, *k);
            }
        }
        best.1
    }

    /// Simulated and oracle intensities at the mode nearest `k`.
    pub fn at(&self, k: f64) -> (Estimate, f64) {
        let i = (0..self.wavenumbers.len())
            .min_by(|&a, &b| (self.wavenumbers[a] - k).abs().total_cmp(&(self.wavenumbers[b] - k).abs()))
            .unwrap_or(0);
        (self.simulated[i], self.oracle[i])
    }
}

pub fn intensity_spectrum_curve(cfg: &RunConfig, preset: Preset, pump: f64) -> Result<IntensitySpectrumCurve> {
    let mut spec = cfg.campaign(preset, PumpLevel::Absolute(pump), false)?;
    spec.spectrum_window = None;
    spec.record_intensity_spectrum = true;
    let r = run_campaign(&spec)?;
    let s = r.intensity_spectrum.as_ref().expect("intensity spectrum recorded");
    let grid = cfg.grid()?;
    let params = spec.params.with_pump(pump);
    let ss = pump_steady_state(&params, &grid, Truncation::Grid)?;
    let oracle: BTreeMap<i64, f64> = intensity_spectrum(&ss, &params, &grid)?
        .into_iter()
        .map(|(k, v)| ((k / grid.k_unit()).round() as i64, v))
        .collect();
    Ok(IntensitySpectrumCurve {
        preset,
        pump,
        wavenumbers: s.wavenumbers.clone(),
        oracle: s.modes.iter().map(|m| oracle.get(m).copied().unwrap_or(f64::NAN)).collect(),
        simulated: s.estimates()?,
        provenance: Provenance::from_campaign("simulation", &r),
    })
}

pub fn cmd_fig1(cfg: &RunConfig) -> Result<(FigureDataset, FigureDataset)> {
    let f = &cfg.figures;
    let mut a = FigureDataset::new(
        FigureId::Fig1a,
        &["preset", "kind", "fraction", "pump", "threshold", "intensity", "standard_error"],
    );
    let mut b = FigureDataset::new(FigureId::Fig1b, &["preset", "k", "oracle", "intensity", "standard_error"]);
    for &p in &f.presets {
        let (params, t) = preset_threshold(cfg, p)?;
        for &x in &f.fig1_oracle {
            let v = oracle_intensity(&params.with_pump(x * t.pump), cfg)?;
            a.rows.push(vec![
                Cell::text(p.name()),
                Cell::text("oracle"),
                Cell::num(x),
                Cell::num(x * t.pump),
                Cell::num(t.pump),
                Cell::num(v),
                Cell::Missing,
            ]);
        }
        a.provenance.push(Provenance::analytic("oracle", p, &params, Some(t.pump), cfg)?);
        for &x in &f.fig1_points {
            let pt = intensity_point(cfg, p, x, Some(t.pump))?;
            a.rows.push(vec![
                Cell::text(p.name()),
                Cell::text("simulation"),
                Cell::num(x),
                Cell::num(pt.pump),
                Cell::num(t.pump),
                Cell::num(pt.simulated.value),
                Cell::num(pt.simulated.standard_error),
            ]);
            a.provenance.push(pt.provenance);
        }
        let c = intensity_spectrum_curve(cfg, p, f.fig1_spectrum_pump)?;
        for ((k, o), e) in c.wavenumbers.iter().zip(&c.oracle).zip(&c.simulated) {
            b.rows.push(vec![
                Cell::text(p.name()),
                Cell::num(*k),
                Cell::num(*o),
                Cell::num(e.value),
                Cell::num(e.standard_error),
            ]);
        }
        b.note(format!("{p}.peak_k"), c.peak());
        b.provenance.push(c.provenance);
    }
    Ok((a, b))
}

/// Noise statistics of the recorded pair from which figures are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePath {
    EqualTime,
    ZeroFrequency,
}

fn covariances(r: &CampaignResult, path: NoisePath) -> Result<(QuadratureCovariance, Vec<QuadratureCovariance>)> {
    let pooling = Pooling::WithinTrajectory;
    match path {
        NoisePath::EqualTime => {
            let p = &r.pairs[0];
            Ok((p.equal_time(pooling)?, p.leave_one_out(pooling)?))
        }
        NoisePath::ZeroFrequency => {
            let s = r.spectra.first().ok_or_else(|| {
                Error::InsufficientStatistics("campaign recorded no zero-frequency spectra".into())
            })?;
            Ok((s.output_covariance(pooling)?, s.leave_one_out(pooling)?))
        }
    }
}

/// Var Σ_{θ,φ̄} against θ at the best interference angle φ̄.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCurve {
    pub preset: Option<Preset>,
    pub pump: f64,
    pub threshold: Option<f64>,
    pub path: NoisePath,
    pub lambda: f64,
    pub phi: f64,
    pub thetas: Vec<f64>,
    pub variances: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub min: Estimate,
    pub max: Estimate,
    /// Measure of the θ set below shot noise.
    pub squeezed_measure: f64,
    pub shot_noise: f64,
}

pub fn theta_curve(r: &CampaignResult, path: NoisePath, analysis: &AnalysisConfig) -> Result<ThetaCurve> {
    let (g, loo) = covariances(r, path)?;
    let thetas = angle_grid(analysis.theta_points, std::f64::consts::PI);
    let phis = angle_grid(analysis.phi_points, 2.0 * std::f64::consts::PI);
    let lambda = analysis.lambda;
    let phi = best_phi(&g, &thetas, &phis, lambda)?;
    let scan = theta_scan(&g, &thetas, phi, lambda);
    let parts: Vec<_> = loo.iter().map(|c| theta_scan(c, &thetas, phi, lambda)).collect();
    let standard_errors = (0..thetas.len())
        .map(|i| jackknife_error(&parts.iter().map(|s| s.variances[i]).collect::<Vec<_>>()))
        .collect();
    let spread = |f: fn(&crate::stats::ThetaScan) -> f64| jackknife_error(&parts.iter().map(f).collect::<Vec<_>>());
    Ok(ThetaCurve {
        preset: r.manifest.preset,
        pump: r.pump,
        threshold: r.manifest.threshold,
        path,
        lambda,
        phi,
        min: Estimate {
            value: scan.min_variance,
            standard_error: spread(|s| s.min_variance),
        },
        max: Estimate {
            value: scan.max_variance,
            standard_error: spread(|s| s.max_variance),
        },
        squeezed_measure: scan.squeezed_measure,
        shot_noise: shot_noise(lambda),
        thetas,
        variances: scan.variances,
        standard_errors,
    })
}

/// Campaign at `fraction`·E_th with zero-frequency spectra and, above
/// threshold, pattern positions.
pub fn noise_campaign(cfg: &RunConfig, preset: Preset, fraction: f64, threshold: Option<f64>) -> Result<CampaignResult> {
    let above = fraction > 1.0;
    let mut spec = cfg.campaign(preset, PumpLevel::Relative(fraction), above)?;
    spec.threshold = threshold;
    if above {
        spec.position_stride = Some(((5.0 / spec.sample_interval()).round() as usize).max(1));
    }
    run_campaign(&spec)
}

fn push_curve(ds: &mut FigureDataset, regime: &str, c: &ThetaCurve, r: &CampaignResult, analysis: &AnalysisConfig) -> Result<()> {
    let name = c.preset.map_or("custom", Preset::name);
    for ((t, v), e) in c.thetas.iter().zip(&c.variances).zip(&c.standard_errors) {
        ds.rows.push(vec![
            Cell::text(name),
            Cell::text(regime),
            Cell::num(c.pump),
            Cell::num(c.threshold.unwrap_or(f64::NAN)),
            Cell::num(*t),
            Cell::num(*v),
            Cell::num(*e),
            Cell::num(c.shot_noise),
        ]);
    }
    let key = |s: &str| format!("{name}.{regime}.{s}");
    ds.note(key("phi"), c.phi);
    ds.note(key("min"), c.min.value);
    ds.note(key("min_se"), c.min.standard_error);
    ds.note(key("max"), c.max.value);
    ds.note(key("max_se"), c.max.standard_error);
    ds.note(key("squeezed_measure"), c.squeezed_measure);
    let eq = theta_curve(r, NoisePath::EqualTime, analysis)?;
    ds.note(key("equal_time_min"), eq.min.value);
    ds.note(key("equal_time_max"), eq.max.value);
    ds.provenance.push(Provenance::from_campaign(regime, r));
    Ok(())
}

fn fig2_columns() -> FigureDataset {
    FigureDataset::new(
        FigureId::Fig2,
        &["preset", "regime", "pump", "threshold", "theta", "variance", "standard_error", "shot_noise"],
    )
}

/// Variance-against-angle dataset from finished campaigns.
pub fn fig2_dataset(below: &[CampaignResult], above: &[CampaignResult], analysis: &AnalysisConfig) -> Result<FigureDataset> {
    let mut ds = fig2_columns();
    for (regime, runs) in [("below", below), ("above", above)] {
        for r in runs {
            let c = theta_curve(r, NoisePath::ZeroFrequency, analysis)?;
            push_curve(&mut ds, regime, &c, r, analysis)?;
        }
    }
    Ok(ds)
}

pub fn cmd_fig2(cfg: &RunConfig) -> Result<FigureDataset> {
    let f = &cfg.figures;
    let mut below = Vec::new();
    let mut above = Vec::new();
    for &p in &f.presets {
        let (_, t) = preset_threshold(cfg, p)?;
        below.push(noise_campaign(cfg, p, f.below, Some(t.pump))?);
        above.push(noise_campaign(cfg, p, f.above, Some(t.pump))?);
    }
    fig2_dataset(&below, &above, &cfg.analysis)
}

/// EPR product and inseparability ratio over (θ0, φ0) with jackknife errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementMaps {
    pub preset: Option<Preset>,
    pub pump: f64,
    pub epr: AngleMap,
    pub epr_errors: Vec<Vec<f64>>,
    pub insep: AngleMap,
    pub insep_errors: Vec<Vec<f64>>,
    /// Minimum of each map with the jackknife error of the minimum.
    pub epr_min: Estimate,
    pub insep_min: Estimate,
}

impl EntanglementMaps {
    /// Cells below `level` by more than `z` standard errors, for (ℰ, ℐ).
    pub fn significant(&self, level: f64, z: f64) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        (
            self.epr.significantly_below(&self.epr_errors, level, z),
            self.insep.significantly_below(&self.insep_errors, level, z),
        )
    }
}

pub fn entanglement_maps(r: &CampaignResult, path: NoisePath, analysis: &AnalysisConfig) -> Result<EntanglementMaps> {
    let (g, loo) = covariances(r, path)?;
    let thetas = angle_grid(analysis.theta_points, std::f64::consts::PI);
    let phis = angle_grid(analysis.phi_points, 2.0 * std::f64::consts::PI);
    let map = |c: Criterion| -> Result<(AngleMap, Vec<Vec<f64>>, Estimate)> {
        let m = angle_scan(&g, &thetas, &phis, c)?;
        let errors = angle_scan_errors(&loo, &thetas, &phis, c)?;
        let mins: Vec<f64> = loo
            .iter()
            .map(|l| angle_scan(l, &thetas, &phis, c).map(|m| m.min_value))
            .collect::<Result<_>>()?;
        let min = Estimate {
            value: m.min_value,
            standard_error: jackknife_error(&mins),
        };
        Ok((m, errors, min))
    };
    let (epr, epr_errors, epr_min) = map(Criterion::Epr)?;
    let (insep, insep_errors, insep_min) = map(Criterion::Insep { a: analysis.insep_a })?;
    Ok(EntanglementMaps {
        preset: r.manifest.preset,
        pump: r.pump,
        epr,
        epr_errors,
        insep,
        insep_errors,
        epr_min,
        insep_min,
    })
}

pub fn fig3_dataset(runs: &[CampaignResult], analysis: &AnalysisConfig) -> Result<FigureDataset> {
    let mut ds = FigureDataset::new(
        FigureId::Fig3,
        &["preset", "criterion", "theta0", "phi0", "value", "standard_error", "below", "significant"],
    );
    for r in runs {
        let m = entanglement_maps(r, NoisePath::ZeroFrequency, analysis)?;
        let name = m.preset.map_or("custom", Preset::name);
        for (label, map, errors, min) in [("epr", &m.epr, &m.epr_errors, m.epr_min), ("insep", &m.insep, &m.insep_errors, m.insep_min)] {
            let mask = map.below_mask();
            for (i, t) in map.thetas.iter().enumerate() {
                for (j, p) in map.phis.iter().enumerate() {
                    let (v, e) = (map.values[i][j], errors[i][j]);
                    let sig = e.is_finite() && v + analysis.significance * e < map.criterion.boundary();
                    ds.rows.push(vec![
                        Cell::text(name),
                        Cell::text(label),
                        Cell::num(*t),
                        Cell::num(*p),
                        Cell::num(v),
                        Cell::num(e),
                        Cell::num(if mask[i][j] { 1.0 } else { 0.0 }),
                        Cell::num(if sig { 1.0 } else { 0.0 }),
                    ]);
                }
            }
            let key = |s: &str| format!("{name}.{label}.{s}");
            ds.note(key("min"), min.value);
            ds.note(key("min_se"), min.standard_error);
            ds.note(key("argmin_theta0"), map.argmin.0);
            ds.note(key("argmin_phi0"), map.argmin.1);
            ds.note(key("max"), map.max_value);
            ds.note(key("below_fraction"), map.below_fraction);
        }
        ds.provenance.push(Provenance::from_campaign("above", r));
    }
    Ok(ds)
}

pub fn cmd_fig3(cfg: &RunConfig) -> Result<FigureDataset> {
    let runs = cfg
        .figures
        .map_presets
        .iter()
        .map(|&p| {
            let (_, t) = preset_threshold(cfg, p)?;
            noise_campaign(cfg, p, cfg.figures.above, Some(t.pump))
        })
        .collect::<Result<Vec<_>>>()?;
    fig3_dataset(&runs, &cfg.analysis)
}
