use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Transverse detuning profile Δ(x) of one cavity field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DetuningProfile {
    /// Δ(x) = mean + amplitude·sin(k·x + phase)
    Sinusoidal {
        mean: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default, rename = "k")]
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Arbitrary periodic profile sampled at the grid points.
    Sampled { samples: Vec<f64> },
}

impl Default for DetuningProfile {
    fn default() -> Self {
        DetuningProfile::uniform(0.0)
    }
}

impl DetuningProfile {
    pub fn uniform(mean: f64) -> Self {
        DetuningProfile::Sinusoidal {
            mean,
            amplitude: 0.0,
            wavenumber: 0.0,
            phase: 0.0,
        }
    }

    pub fn sinusoidal(mean: f64, amplitude: f64, wavenumber: f64, phase: f64) -> Self {
        DetuningProfile::Sinusoidal {
            mean,
            amplitude,
            wavenumber,
            phase,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DetuningProfile::Sinusoidal { mean, .. } => *mean,
            DetuningProfile::Sampled { samples } => {
                samples.iter().sum::<f64>() / samples.len().max(1) as f64
            }
        }
    }

    pub fn is_modulated(&self) -> bool {
        match self {
            DetuningProfile::Sinusoidal { amplitude, .. } => *amplitude != 0.0,
            DetuningProfile::Sampled { samples } => {
                let m = self.mean();
                samples.iter().any(|&s| s != m)
            }
        }
    }

    /// Profile value at position `x`. Sampled profiles are evaluated at the
    /// nearest grid point and need the grid spacing.
    pub fn value_at(&self, x: f64, dx: f64) -> f64 {
        match self {
            DetuningProfile::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => mean + amplitude * (wavenumber * x + phase).sin(),
            DetuningProfile::Sampled { samples } => {
                let n = samples.len() as i64;
                let j = (x / dx).round() as i64;
                samples[j.rem_euclid(n) as usize]
            }
        }
    }

    /// Δ(x_j) on every grid point.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        match self {
            DetuningProfile::Sampled { samples } => samples.clone(),
            _ => (0..grid.n_points())
                .map(|j| self.value_at(grid.x(j), grid.dx()))
                .collect(),
        }
    }

    /// Modulation Δ(x_j) − Δ̄ on every grid point.
    pub fn modulation(&self, grid: &Grid) -> Vec<f64> {
        let mean = self.mean();
        self.sample(grid).into_iter().map(|v| v - mean).collect()
    }

    /// Fourier content of Δ(x) − Δ̄ as `(mode, coefficient)` pairs with
    /// Δ(x) − Δ̄ = Σ c_m e^{i k_m x}.
    pub fn harmonics(&self, grid: &Grid) -> Result<Vec<(i64, Complex64)>> {
        match self {
            DetuningProfile::Sinusoidal {
                amplitude,
                wavenumber,
                phase,
                ..
            } => {
                if *amplitude == 0.0 {
                    return Ok(Vec::new());
                }
                let j = grid
                    .commensurate_mode(*wavenumber)
                    .filter(|&j| j >= 1)
                    .ok_or(Error::Incommensurate {
                        k: *wavenumber,
                        unit: grid.k_unit(),
                    })?;
                if j > grid.max_mode() {
                    return Err(Error::InvalidParameter(format!(
                        "modulation wavenumber {wavenumber} is not resolved by {} points",
                        grid.n_points()
                    )));
                }
                // m sin(Kx+φ) = (m/2i) e^{iφ} e^{iKx} − (m/2i) e^{−iφ} e^{−iKx}
                let half = Complex64::new(0.0, -0.5 * amplitude);
                Ok(vec![
                    (j, half * Complex64::from_polar(1.0, *phase)),
                    (-j, -half * Complex64::from_polar(1.0, -*phase)),
                ])
            }
            DetuningProfile::Sampled { samples } => {
                if samples.len() != grid.n_points() {
                    return Err(Error::InvalidParameter(format!(
                        "sampled detuning has {} points, grid has {}",
                        samples.len(),
                        grid.n_points()
                    )));
                }
                let mean = self.mean();
                let n = samples.len();
                let mut out = Vec::new();
                for m in grid.modes() {
                    if m == 0 {
                        continue;
                    }
                    let k = grid.wavenumber(m);
                    let c: Complex64 = samples
                        .iter()
                        .enumerate()
                        .map(|(j, &s)| (s - mean) * Complex64::from_polar(1.0, -k * grid.x(j)))
                        .sum::<Complex64>()
                        / n as f64;
                    if c.norm() > 1e-13 {
                        out.push((m, c));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Clear the wavenumber and phase of an unmodulated sinusoid so that
    /// equivalent homogeneous profiles compare (and hash) equal.
    pub fn normalized(&self) -> Self {
        match self {
            DetuningProfile::Sinusoidal {
                mean, amplitude, ..
            } if *amplitude == 0.0 => DetuningProfile::uniform(*mean),
            other => other.clone(),
        }
    }
}
