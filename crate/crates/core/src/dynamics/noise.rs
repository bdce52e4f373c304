use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Grid, ModelParams, NoiseConfig};

/// Per-cell noise increments for one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub xi0: Vec<Complex64>,
    pub xi1: Vec<Complex64>,
}

/// Draw the pump and signal increments for a step of length `dt` given the
/// current pump field. Space-time white noise on a cell of width dx has
/// variance ∝ dt/dx.
pub fn synthesize_noise<R: Rng + ?Sized>(
    alpha0: &[Complex64],
    params: &ModelParams,
    grid: &Grid,
    dt: f64,
    time: f64,
    rng: &mut R,
) -> Result<NoiseIncrement> {
    let n = alpha0.len();
    let mut inc = NoiseIncrement {
        xi0: vec![Complex64::new(0.0, 0.0); n],
        xi1: vec![Complex64::new(0.0, 0.0); n],
    };
    let sampler = CellNoise::new(&params.noise, dt, grid.dx());
    for j in 0..n {
        let (a, b) = sampler.draw(alpha0[j], time, rng)?;
        inc.xi0[j] = a;
        inc.xi1[j] = b;
    }
    Ok(inc)
}

/// Scaled single-cell sampler shared by the integrators.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellNoise {
    pump_scale: f64,
    scale: f64,
    normal: f64,
    anomalous: Complex64,
}

impl CellNoise {
    pub fn new(noise: &NoiseConfig, dt: f64, dx: f64) -> Self {
        let unit = noise.epsilon * dt / dx;
        CellNoise {
            pump_scale: (0.5 * noise.pump_normal * unit).sqrt(),
            scale: unit.sqrt(),
            normal: noise.normal,
            anomalous: noise.anomalous,
        }
    }

    /// One (ξ0, ξ1) pair. With s·e^{iψ} = anomalous·α0 and normal N,
    /// ξ1 = √(ε dt/dx) e^{iψ/2} (√((N+s)/2) η1 + i √((N−s)/2) η2)
    /// gives ⟨ξ1 ξ1*⟩ = N and ⟨ξ1 ξ1⟩ = s e^{iψ} in units of ε dt/dx.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(
        &self,
        alpha0: Complex64,
        time: f64,
        rng: &mut R,
    ) -> Result<(Complex64, Complex64)> {
        let c = self.anomalous * alpha0;
        let (s, psi) = c.to_polar();
        if s >= self.normal && s > 0.0 {
            return Err(Error::OutOfValidity {
                time,
                max_abs: alpha0.norm(),
            });
        }
        let e0: f64 = rng.sample(StandardNormal);
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let e3: f64 = rng.sample(StandardNormal);
        let xi0 = Complex64::new(e0, e1) * self.pump_scale;
        let re = (0.5 * (self.normal + s)).sqrt() * e2;
        let im = (0.5 * (self.normal - s)).sqrt() * e3;
        let xi1 = Complex64::from_polar(self.scale, 0.5 * psi) * Complex64::new(re, im);
        Ok((xi0, xi1))
    }
}
